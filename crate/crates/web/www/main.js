import init, { preset_config, simulate, field_grid, validate } from "./pkg/switched_vf_web.js";

const COLORS = { switched: "#c0392b", basic_vf: "#2471a3", plos: "#7d3c98", nlgl: "#1e8449" };
const $ = (id) => document.getElementById(id);
let runs = [];

function status(msg) {
  $("status").textContent = msg || "";
}

function bounds(runs) {
  let b = { x0: Infinity, y0: Infinity, x1: -Infinity, y1: -Infinity };
  for (const r of runs) {
    const xs = r.series.x.concat([r.start[0]]);
    const ys = r.series.y.concat([r.start[1]]);
    b.x0 = Math.min(b.x0, ...xs); b.x1 = Math.max(b.x1, ...xs);
    b.y0 = Math.min(b.y0, ...ys); b.y1 = Math.max(b.y1, ...ys);
  }
  const pad = 0.08 * Math.max(b.x1 - b.x0, b.y1 - b.y0, 100);
  return { x0: b.x0 - pad, y0: b.y0 - pad, x1: b.x1 + pad, y1: b.y1 + pad };
}

function viewport(canvas, b) {
  const s = Math.min(canvas.width / (b.x1 - b.x0), canvas.height / (b.y1 - b.y0));
  const ox = (canvas.width - s * (b.x1 - b.x0)) / 2;
  const oy = (canvas.height - s * (b.y1 - b.y0)) / 2;
  return {
    s,
    px: (x) => ox + s * (x - b.x0),
    py: (y) => canvas.height - (oy + s * (y - b.y0)),
    box: {
      x0: b.x0 - ox / s, x1: b.x0 + (canvas.width - ox) / s,
      y0: b.y0 - oy / s, y1: b.y0 + (canvas.height - oy) / s,
    },
  };
}

function polyline(ctx, v, xs, ys) {
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(v.px(x), v.py(ys[i])) : ctx.moveTo(v.px(x), v.py(ys[i]))));
  ctx.stroke();
}

function drawField(ctx, v, config) {
  const nx = 36, ny = 20, b = v.box;
  const res = JSON.parse(field_grid(config, b.x0, b.y0, b.x1, b.y1, nx, ny));
  if (res.error) return status(res.error);
  const len = 0.35 * Math.min(ctx.canvas.width / nx, ctx.canvas.height / ny);
  ctx.strokeStyle = "#bbb";
  ctx.lineWidth = 1;
  for (const [x, y, course, d] of res.cells) {
    const cx = v.px(x), cy = v.py(y);
    const dx = Math.cos(course) * len, dy = -Math.sin(course) * len;
    ctx.strokeStyle = Math.abs(d) < res.d_s ? "#e59866" : "#bbb";
    ctx.beginPath();
    ctx.moveTo(cx - dx, cy - dy);
    ctx.lineTo(cx + dx, cy + dy);
    ctx.lineTo(cx + dx - 0.4 * (dx - 0.6 * dy), cy + dy - 0.4 * (dy + 0.6 * dx));
    ctx.stroke();
  }
}

function drawMap() {
  const canvas = $("map"), ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!runs.length) return;
  const v = viewport(canvas, bounds(runs));
  if ($("field").checked) drawField(ctx, v, $("config").value);
  ctx.strokeStyle = "#333";
  ctx.lineWidth = 2;
  ctx.setLineDash([6, 4]);
  polyline(ctx, v, runs[0].path.x, runs[0].path.y);
  ctx.setLineDash([]);
  for (const r of runs) {
    ctx.strokeStyle = COLORS[r.law];
    ctx.lineWidth = 2;
    polyline(ctx, v, r.series.x, r.series.y);
    ctx.fillStyle = COLORS[r.law];
    ctx.beginPath();
    ctx.arc(v.px(r.start[0]), v.py(r.start[1]), 4, 0, 2 * Math.PI);
    ctx.fill();
  }
  $("legend").innerHTML = runs
    .map((r) => `<span style="color:${COLORS[r.law]}">&#9632; ${r.law}</span>`)
    .join("");
}

function drawPlot() {
  const canvas = $("plot"), ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!runs.length) return;
  const tmax = Math.max(...runs.map((r) => r.series.t[r.series.t.length - 1] || 0), 1);
  const dmax = Math.max(...runs.flatMap((r) => r.series.d.map(Math.abs)), 1);
  const px = (t) => 40 + (canvas.width - 50) * (t / tmax);
  const py = (d) => canvas.height / 2 - (canvas.height / 2 - 10) * (d / dmax);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(40, py(0)); ctx.lineTo(canvas.width - 10, py(0));
  ctx.stroke();
  ctx.fillStyle = "#555";
  ctx.fillText(`d(t), +-${dmax.toFixed(0)} m, ${tmax.toFixed(0)} s`, 44, 12);
  for (const r of runs) {
    ctx.strokeStyle = COLORS[r.law];
    ctx.beginPath();
    r.series.t.forEach((t, i) => (i ? ctx.lineTo(px(t), py(r.series.d[i])) : ctx.moveTo(px(t), py(r.series.d[i]))));
    ctx.stroke();
  }
}

function fmt(x, digits) {
  return x === null || x === undefined ? "-" : x.toFixed(digits);
}

function drawTable() {
  const rows = runs.map((r) => {
    const m = r.metrics;
    return `<tr><td>${r.law}</td><td>${fmt(m.t_conv, 2)}</td><td>${fmt(m.d_rms, 2)}</td>` +
      `<td>${fmt(m.chi_dot_rms, 4)}</td><td>${fmt(m.chi_dot_max, 4)}</td><td>${fmt(m.chattering_index, 1)}</td>` +
      `<td>${m.failure || ""}</td></tr>`;
  });
  $("metrics").innerHTML =
    "<tr><th>law</th><th>t_conv [s]</th><th>d_rms [m]</th><th>chi_dot rms</th><th>max |chi_dot|</th>" +
    "<th>chatter [1/s]</th><th>note</th></tr>" + rows.join("");
}

function simulateLaws(laws) {
  status("");
  const config = $("config").value;
  const out = [];
  for (const law of laws) {
    const res = JSON.parse(simulate(config, law, 10));
    if (res.error) return status(res.error);
    out.push(res);
  }
  runs = out;
  drawMap();
  drawPlot();
  drawTable();
}

function checkFeasibility() {
  const r = JSON.parse(validate($("config").value));
  if (r.error) return status(r.error);
  const kappa = r.kappa_max === null ? "unbounded" : r.kappa_max.toFixed(6);
  $("feasibility").textContent =
    `linear branch  ${r.k1_curvature.toFixed(6)} 1/m at |d| = ${r.k1_peak_distance.toFixed(1)} m\n` +
    `cubic branch   ${r.k3_curvature.toFixed(6)} 1/m at |d| = ${r.k3_peak_distance.toFixed(1)} m\n` +
    `left side      ${r.lhs.toFixed(6)} 1/m\nkappa_max      ${kappa}\n` +
    `result         ${r.pass ? "PASS" : "FAIL"}`;
}

await init();
$("config").value = preset_config("reference");
document.querySelectorAll("[data-preset]").forEach((b) =>
  b.addEventListener("click", () => {
    $("config").value = preset_config(b.dataset.preset);
    simulateLaws([$("law").value]);
  }));
$("run").addEventListener("click", () => simulateLaws([$("law").value]));
$("compare").addEventListener("click", () => simulateLaws(["switched", "basic_vf", "plos", "nlgl"]));
$("field").addEventListener("change", drawMap);
$("validate").addEventListener("click", checkFeasibility);
simulateLaws(["switched"]);
