// Plain-JS glue for the treeline demo. Expects the wasm-bindgen output in
// ./pkg (see the README for the two build commands).

import init, { analyze_tree, decode_with_noise, coverage_curves } from "./pkg/treeline_wasm.js";

const $ = (id) => document.getElementById(id);
const SCHEME_COLORS = { pre: "#d97706", post: "#64748b", in: "#2563eb" };

function tagChip(tag) {
  const cls = tag.startsWith("s") ? "tag shift" : "tag";
  return `<span class="${cls}">${tag}</span>`;
}

function sparkline(values, { width = 220, height = 46, max = null, color = "#2563eb" } = {}) {
  const canvas = document.createElement("canvas");
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext("2d");
  const top = max ?? Math.max(1, ...values);
  const step = width / Math.max(1, values.length);
  ctx.fillStyle = color;
  values.forEach((v, i) => {
    const h = (v / top) * (height - 6);
    ctx.fillRect(i * step + 1, height - h - 1, Math.max(2, step - 2), h);
  });
  ctx.strokeStyle = "#d8dee9";
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
  return canvas;
}

// --- section 1: analysis ---------------------------------------------------

function renderAnalysis(data) {
  const out = $("analyze-out");
  out.innerHTML = "";
  const info = document.createElement("p");
  info.className = "mono";
  info.textContent = `normalized: ${data.normalized}`;
  out.appendChild(info);

  const table = document.createElement("table");
  table.className = "tags";
  table.innerHTML =
    `<tr><th>scheme</th><th>tags</th><th>stack profile</th><th>depth</th>` +
    `<th>word deviations</th><th>max / mean dev</th></tr>`;
  const profileMax = Math.max(...data.schemes.map((s) => s.required_depth));
  for (const s of data.schemes) {
    const row = document.createElement("tr");
    const tags = s.tags.map(tagChip).join("");
    row.innerHTML =
      `<td><b style="color:${SCHEME_COLORS[s.scheme]}">${s.scheme}</b></td>` +
      `<td>${tags}</td><td></td><td>${s.required_depth}</td>` +
      `<td></td><td>${s.max_deviation} / ${s.mean_deviation.toFixed(2)}</td>`;
    row.children[2].appendChild(
      sparkline([s.start_measure, ...s.profile], { max: profileMax, color: SCHEME_COLORS[s.scheme] })
    );
    row.children[4].appendChild(
      sparkline(s.deviations, { max: Math.max(1, s.max_deviation), color: SCHEME_COLORS[s.scheme] })
    );
    table.appendChild(row);
  }
  out.appendChild(table);

  for (const [label, text] of [["right-corner", data.right_corner], ["left-corner", data.left_corner]]) {
    const p = document.createElement("p");
    p.className = "mono";
    p.textContent = `${label}: ${text}`;
    out.appendChild(p);
  }
}

function runAnalysis() {
  const err = $("analyze-error");
  err.textContent = "";
  try {
    renderAnalysis(JSON.parse(analyze_tree($("tree-input").value.trim())));
  } catch (e) {
    err.textContent = String(e);
    $("analyze-out").innerHTML = "";
  }
}

// --- section 2: noisy decoding ---------------------------------------------

function renderNoise(data) {
  const out = $("noise-out");
  out.innerHTML = "";
  const gold = document.createElement("p");
  gold.innerHTML = `gold: ${data.gold_tags.map(tagChip).join("")}`;
  out.appendChild(gold);
  const table = document.createElement("table");
  table.className = "tags";
  table.innerHTML = `<tr><th>decoder</th><th>tags</th><th>tree</th><th>valid</th><th>F1</th></tr>`;
  for (const r of data.results) {
    const row = document.createElement("tr");
    const badge = r.valid ? `<span class="badge ok">valid</span>` : `<span class="badge bad">invalid</span>`;
    const exact = r.exact_match ? " (exact)" : "";
    row.innerHTML =
      `<td>${r.decoder}</td><td>${r.tags.map(tagChip).join("")}</td>` +
      `<td class="mono">${r.tree}</td><td>${badge}</td><td>${r.f1.toFixed(2)}${exact}</td>`;
    table.appendChild(row);
  }
  out.appendChild(table);
}

function runNoise() {
  const err = $("noise-error");
  err.textContent = "";
  try {
    const json = decode_with_noise(
      $("tree-input").value.trim(),
      $("noise-scheme").value,
      Number($("noise-sigma").value),
      BigInt(Math.max(0, Number($("noise-seed").value) | 0)),
      Number($("noise-beam").value)
    );
    renderNoise(JSON.parse(json));
  } catch (e) {
    err.textContent = String(e);
    $("noise-out").innerHTML = "";
  }
}

// --- section 3: coverage ---------------------------------------------------

function drawCoverage(views) {
  const canvas = $("cov-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pad = { l: 42, r: 12, t: 10, b: 30 };
  const w = canvas.width - pad.l - pad.r;
  const h = canvas.height - pad.t - pad.b;
  const maxDepth = Math.max(...views.map((v) => v.curve[v.curve.length - 1][0]));

  ctx.strokeStyle = "#d8dee9";
  ctx.fillStyle = "#68748a";
  ctx.font = "11px system-ui";
  for (let frac = 0; frac <= 1.001; frac += 0.25) {
    const y = pad.t + h - frac * h;
    ctx.beginPath();
    ctx.moveTo(pad.l, y);
    ctx.lineTo(pad.l + w, y);
    ctx.stroke();
    ctx.fillText(frac.toFixed(2), 6, y + 4);
  }
  const ticks = Math.min(maxDepth, 10);
  for (let i = 1; i <= ticks; i++) {
    const depth = Math.round((i * maxDepth) / ticks);
    const x = pad.l + (depth / maxDepth) * w;
    ctx.fillText(String(depth), x - 4, canvas.height - 12);
  }
  ctx.fillText("stack bound", pad.l + w / 2 - 30, canvas.height - 2);

  for (const view of views) {
    ctx.strokeStyle = SCHEME_COLORS[view.scheme];
    ctx.lineWidth = 2;
    ctx.beginPath();
    let prevY = pad.t + h;
    ctx.moveTo(pad.l, prevY);
    for (const [depth, coverage] of view.curve) {
      const x = pad.l + (depth / maxDepth) * w;
      const y = pad.t + h - coverage * h;
      ctx.lineTo(x, prevY); // coverage is a step function of the bound
      ctx.lineTo(x, y);
      prevY = y;
    }
    ctx.lineTo(pad.l + w, prevY);
    ctx.stroke();
  }

  $("cov-legend").innerHTML = views
    .map(
      (v) =>
        `<div><b style="color:${SCHEME_COLORS[v.scheme]}">&#9632; ${v.scheme}</b>` +
        ` &mdash; full coverage at depth ${v.curve[v.curve.length - 1][0]},` +
        ` mean deviation ${v.mean_deviation.toFixed(2)}</div>`
    )
    .join("");
}

function runCoverage() {
  const err = $("cov-error");
  err.textContent = "";
  try {
    const json = coverage_curves(
      Number($("cov-trees").value),
      Number($("cov-len").value),
      Number($("cov-skew").value),
      BigInt(Math.max(0, Number($("cov-seed").value) | 0))
    );
    drawCoverage(JSON.parse(json));
  } catch (e) {
    err.textContent = String(e);
  }
}

// --- wiring ------------------------------------------------------------------

function bindSlider(id, format) {
  $(id).addEventListener("input", () => {
    $(`${id}-val`).textContent = format(Number($(id).value));
  });
}

async function main() {
  await init();
  $("analyze-btn").addEventListener("click", runAnalysis);
  $("noise-btn").addEventListener("click", runNoise);
  $("cov-btn").addEventListener("click", runCoverage);
  bindSlider("noise-sigma", (v) => v.toFixed(2));
  bindSlider("noise-beam", (v) => String(v));
  bindSlider("cov-trees", (v) => String(v));
  bindSlider("cov-len", (v) => String(v));
  bindSlider("cov-skew", (v) => v.toFixed(2));
  for (const id of ["noise-sigma", "noise-beam"]) {
    $(id).addEventListener("change", runNoise);
  }
  for (const id of ["cov-trees", "cov-len", "cov-skew"]) {
    $(id).addEventListener("change", runCoverage);
  }
  runAnalysis();
  runNoise();
  runCoverage();
}

main();
