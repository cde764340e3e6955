import init, { certify, explore2x2, epsilonSweep } from "./pkg/biparsdp_web.js";

const presets = {
  cycle4: {
    n: 4, m: 2,
    objective: [[1, 2, -2], [1, 4, 2], [2, 3, -1], [3, 3, 5], [3, 4, 1], [4, 4, -4]],
    constraints: [
      { matrix: [[1, 1, 5], [1, 2, 2], [1, 4, 1], [2, 2, -1], [2, 3, 3], [3, 3, 3], [3, 4, -1], [4, 4, 4]], rhs: 10 },
      { matrix: [[1, 1, -1], [1, 2, 1], [2, 2, 4], [2, 3, -1], [3, 3, 6], [3, 4, 1], [4, 4, -2]], rhs: 10 },
    ],
  },
  small: {
    n: 2, m: 1,
    objective: [[1, 1, -3], [1, 2, -1], [2, 2, -2]],
    constraints: [{ matrix: [[1, 1, 3], [1, 2, 4], [2, 2, 6]], rhs: 1 }],
  },
  triangle: {
    n: 3, m: 3,
    objective: [[1, 2, 0.5], [1, 3, 0.5], [2, 3, 0.5]],
    constraints: [1, 2, 3].map((i) => ({ matrix: [[i, i, 1]], rhs: 1 })),
  },
  doubled: {
    n: 4, m: 2,
    objective: [[1, 1, -3], [1, 2, -1], [2, 2, -2], [3, 3, -3], [3, 4, -1], [4, 4, -2]],
    constraints: [
      { matrix: [[1, 1, 3], [1, 2, 4], [2, 2, 6]], rhs: 1 },
      { matrix: [[3, 3, 3], [3, 4, 4], [4, 4, 6]], rhs: 1 },
    ],
  },
};

const $ = (id) => document.getElementById(id);
const fmt = (v, d = 4) => (v === null || v === undefined ? "-" : Number(v).toPrecision(d));
const show = (obj) => JSON.stringify(obj, null, 1).replace(/\n\s*(?=[\d\-\]])/g, " ");

function verdictSpan(v) {
  return `<span class="verdict ${v}">${v}</span>`;
}

function runCertify() {
  const out = $("certify-summary");
  try {
    const r = JSON.parse(certify($("instance").value, $("options").value));
    const rule = r.rules.find((x) => x.rule === r.applied_rule);
    out.innerHTML = `${verdictSpan(r.verdict)} ${rule ? "by " + rule.rule + ": " + rule.detail : ""}` +
      (r.notes.length ? `<br><small>${r.notes.join("<br>")}</small>` : "");
    const rows = r.per_edge.map((e) =>
      `<tr><td>(${e.edge.join(", ")})</td><td>${e.sign}</td><td>${fmt(e.mu_min)}</td><td>${fmt(e.mu_max)}</td><td>${e.nonpositive_infeasible ?? "-"}</td></tr>`);
    $("edges").innerHTML = rows.length
      ? `<tr><th>edge</th><th>sign</th><th>&mu;* min</th><th>&mu;* max</th><th>S(y)<sub>kl</sub> &le; 0 infeasible</th></tr>${rows.join("")}`
      : "";
    $("report").textContent = JSON.stringify(r, null, 2);
  } catch (e) {
    out.innerHTML = `<span class="err">${e.message ?? e}</span>`;
    $("edges").innerHTML = "";
    $("report").textContent = "";
  }
}

const sliders = [
  ["Q⁰₁₁", "q0", 0, -3], ["Q⁰₁₂", "q0", 1, -1], ["Q⁰₂₂", "q0", 2, -2],
  ["Q¹₁₁", "q1", 0, 3], ["Q¹₁₂", "q1", 1, 4], ["Q¹₂₂", "q1", 2, 6],
  ["b", "b", 0, 1],
];
const state = { q0: [-3, -1, -2], q1: [3, 4, 6], b: 1 };

function buildSliders() {
  const box = $("sliders");
  for (const [label, key, idx, init] of sliders) {
    const row = document.createElement("label");
    const min = key === "b" ? -2 : -8;
    row.innerHTML = `${label}<input type="range" min="${min}" max="8" step="0.1" value="${init}"><output>${init}</output>`;
    const input = row.querySelector("input");
    input.addEventListener("input", () => {
      const v = Number(input.value);
      row.querySelector("output").textContent = v;
      if (key === "b") state.b = v; else state[key][idx] = v;
      explore();
    });
    box.appendChild(row);
  }
}

function draw(x) {
  const c = $("plot"), g = c.getContext("2d");
  const R = 4, s = c.width / (2 * R);
  const img = g.createImageData(c.width, c.height);
  const [a, b2, d] = state.q1;
  for (let py = 0; py < c.height; py++) {
    for (let px = 0; px < c.width; px++) {
      const u = px / s - R, v = R - py / s;
      const k = 4 * (py * c.width + px);
      const inside = a * u * u + 2 * b2 * u * v + d * v * v <= state.b;
      img.data[k] = inside ? 200 : 255; img.data[k + 1] = inside ? 220 : 255; img.data[k + 2] = 255; img.data[k + 3] = 255;
    }
  }
  g.putImageData(img, 0, 0);
  g.strokeStyle = "#999";
  g.beginPath(); g.moveTo(0, c.height / 2); g.lineTo(c.width, c.height / 2); g.moveTo(c.width / 2, 0); g.lineTo(c.width / 2, c.height); g.stroke();
  if (x) {
    g.fillStyle = "#c02020";
    for (const sgn of [1, -1]) {
      g.beginPath();
      g.arc((sgn * x[0] + R) * s, (R - sgn * x[1]) * s, 4, 0, 2 * Math.PI);
      g.fill();
    }
  }
}

function explore() {
  const out = $("explore-out");
  try {
    const r = JSON.parse(explore2x2(JSON.stringify(state)));
    const rel = r.relaxation;
    out.innerHTML = `${verdictSpan(r.verdict)}<br>rule: ${r.rule ?? "-"}<br>` +
      `&mu;* = ${fmt(r.mu)}${r.mu_attained === false ? " (box bound)" : ""}<br>` +
      `t* = ${fmt(r.assumption?.t_star)}<br>` +
      (rel.error ? `<span class="err">${rel.error}</span>` :
        `relaxation value ${fmt(rel.value, 6)}, rank ${rel.rank}<br>x = ${rel.x ? "(" + rel.x.map((v) => fmt(v)).join(", ") + ")" : "-"}`) +
      (r.notes.length ? `<br><small>${r.notes.join("<br>")}</small>` : "");
    draw(rel.x);
  } catch (e) {
    out.innerHTML = `<span class="err">${e.message ?? e}</span>`;
    draw(null);
  }
}

function runSweep() {
  const table = $("sweep");
  try {
    const eps = $("eps").value.split(",").map((s) => Number(s.trim())).filter((v) => !Number.isNaN(v));
    const input = { instance: JSON.parse($("sweep-instance").value), epsilons: eps, mode: $("mode").value };
    const pts = JSON.parse(epsilonSweep(JSON.stringify(input)));
    table.innerHTML = `<tr><th>&epsilon;</th><th>verdict</th><th>rule</th><th>relaxation value</th><th>min S(y*)<sub>kl</sub></th></tr>` +
      pts.map((p) => `<tr><td>${p.epsilon}</td><td>${verdictSpan(p.verdict)}</td><td>${p.applied_rule ?? "-"}</td>` +
        `<td>${fmt(p.primal_value, 8)}</td><td>${p.error ? `<span class="err">${p.error}</span>` : fmt(p.min_edge_entry)}</td></tr>`).join("");
  } catch (e) {
    table.innerHTML = `<tr><td class="err">${e.message ?? e}</td></tr>`;
  }
}

await init();
for (const b of document.querySelectorAll("[data-preset]")) {
  b.addEventListener("click", () => { $("instance").value = show(presets[b.dataset.preset]); runCertify(); });
}
for (const b of document.querySelectorAll("[data-sweep]")) {
  b.addEventListener("click", () => { $("sweep-instance").value = show(presets[b.dataset.sweep]); });
}
$("run-certify").addEventListener("click", runCertify);
$("run-sweep").addEventListener("click", runSweep);
$("instance").value = show(presets.cycle4);
$("sweep-instance").value = show(presets.doubled);
buildSliders();
runCertify();
explore();
