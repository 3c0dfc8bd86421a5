import init, { snapshot, curves, stationPower } from "./pkg/hcn_sim_wasm.js";

const COLORS = { MBS: "#444", CSBS: "#1f77b4", RSBS: "#2ca02c", HSBS: "#ff7f0e" };
const SCHEME_COLORS = { nearest_bs: "#d62728", joint: "#9467bd", proposed_joint: "#2ca02c" };
const DENSITIES = [0, 25, 50, 100, 200, 400, 600, 800, 1000];

const $ = (id) => document.getElementById(id);

function showError(e) {
  $("error").textContent = e ? String(e.message ?? e) : "";
}

function drawMap(snap) {
  const canvas = $("map");
  const ctx = canvas.getContext("2d");
  const half = canvas.width / 2;
  const scale = (half - 10) / snap.macro_radius;
  const px = (x) => half + x * scale;
  const py = (y) => half - y * scale;
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.arc(half, half, snap.macro_radius * scale, 0, 2 * Math.PI);
  ctx.stroke();

  for (const s of snap.stations) {
    if (s.kind === "MBS" || s.mode !== "active") continue;
    ctx.fillStyle = COLORS[s.kind] + "22";
    ctx.beginPath();
    ctx.arc(px(s.x), py(s.y), s.radius * scale, 0, 2 * Math.PI);
    ctx.fill();
  }

  ctx.lineWidth = 0.5;
  for (const u of snap.users) {
    if (u.server === null) continue;
    const s = snap.stations[u.server];
    ctx.strokeStyle = COLORS[s.kind] + "88";
    ctx.beginPath();
    ctx.moveTo(px(u.x), py(u.y));
    ctx.lineTo(px(s.x), py(s.y));
    ctx.stroke();
  }
  ctx.lineWidth = 1;
  for (const u of snap.users) {
    ctx.fillStyle = u.server === null ? "#d00" : "#000";
    ctx.fillRect(px(u.x) - 1.5, py(u.y) - 1.5, 3, 3);
  }

  for (const s of snap.stations) {
    const r = s.kind === "MBS" ? 8 : 5;
    ctx.beginPath();
    ctx.arc(px(s.x), py(s.y), r, 0, 2 * Math.PI);
    if (s.mode === "active") {
      ctx.fillStyle = COLORS[s.kind];
      ctx.fill();
    } else {
      ctx.strokeStyle = COLORS[s.kind];
      ctx.stroke();
    }
  }
}

function summarize(snap) {
  const count = (kind) => snap.stations.filter((s) => s.kind === kind && s.mode === "active").length;
  const total = (kind) => snap.stations.filter((s) => s.kind === kind).length;
  const rows = [
    ["users", snap.users.length],
    ["unserved", snap.unserved],
    ["grid power (W)", snap.grid_power.toFixed(1)],
    ["sum rate (Mbit/s)", (snap.sum_rate / 1e6).toFixed(2)],
    ["iterations", snap.iterations],
    ...["CSBS", "RSBS", "HSBS"].map((k) => [`active ${k}`, `${count(k)} / ${total(k)}`]),
  ];
  $("summary").innerHTML = rows.map(([k, v]) => `<tr><th>${k}</th><td>${v}</td></tr>`).join("");
}

function runSample() {
  try {
    const snap = JSON.parse(
      snapshot($("scheme").value, Number($("density").value), Number($("lambda").value), Number($("seed").value) >>> 0),
    );
    drawMap(snap);
    summarize(snap);
    showError(null);
  } catch (e) {
    showError(e);
  }
}

function drawPlot(canvas, points, key, label) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width;
  const h = canvas.height;
  const pad = { l: 60, r: 10, t: 20, b: 30 };
  ctx.clearRect(0, 0, w, h);
  const xs = points.map((p) => p.density);
  const ys = points.map((p) => p[key]);
  const xmax = Math.max(...xs);
  const ymax = Math.max(...ys) * 1.05 || 1;
  const X = (x) => pad.l + (x / xmax) * (w - pad.l - pad.r);
  const Y = (y) => h - pad.b - (y / ymax) * (h - pad.t - pad.b);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad.l, pad.t, w - pad.l - pad.r, h - pad.t - pad.b);
  ctx.fillStyle = "#222";
  ctx.fillText(label, pad.l, 12);
  ctx.fillText(ymax.toPrecision(3), 4, pad.t + 8);
  ctx.fillText("0", pad.l - 12, h - pad.b);
  ctx.fillText(String(xmax), w - pad.r - 24, h - 10);
  ctx.fillText("users", w / 2, h - 10);

  for (const scheme of Object.keys(SCHEME_COLORS)) {
    const series = points.filter((p) => p.scheme === scheme).sort((a, b) => a.density - b.density);
    ctx.strokeStyle = SCHEME_COLORS[scheme];
    ctx.beginPath();
    series.forEach((p, i) => (i ? ctx.lineTo(X(p.density), Y(p[key])) : ctx.moveTo(X(p.density), Y(p[key]))));
    ctx.stroke();
  }
}

function runCurves() {
  $("sweep-status").textContent = "running...";
  // Let the status text paint before the synchronous sweep blocks the page.
  setTimeout(() => {
    try {
      const pts = JSON.parse(
        curves(new Float64Array(DENSITIES), Number($("lambda").value), Number($("samples").value), Number($("seed").value) >>> 0),
      );
      drawPlot($("plot-power"), pts, "grid_power", "grid power (W)");
      drawPlot($("plot-rate"), pts, "sum_rate", "sum rate (bit/s)");
      drawPlot($("plot-ee"), pts, "energy_efficiency", "energy efficiency (bit/J)");
      $("sweep-status").innerHTML = Object.entries(SCHEME_COLORS)
        .map(([s, c]) => `<span style="color:${c}">${s}</span>`)
        .join(" ");
      showError(null);
    } catch (e) {
      $("sweep-status").textContent = "";
      showError(e);
    }
  }, 20);
}

function updatePower() {
  const load = Number($("load").value);
  $("load-out").textContent = `${Math.round(load * 100)}%`;
  try {
    $("power-out").textContent = `${stationPower($("kind").value, load).toFixed(2)} W`;
  } catch (e) {
    showError(e);
  }
}

await init();
$("legend").innerHTML = Object.entries(COLORS)
  .map(([k, c]) => `<span><i class="swatch" style="background:${c}"></i>${k}</span>`)
  .join("") + "<span>hollow = sleeping or off</span>";
$("density").addEventListener("input", () => ($("density-out").textContent = $("density").value));
$("run").addEventListener("click", runSample);
$("sweep").addEventListener("click", runCurves);
$("kind").addEventListener("change", updatePower);
$("load").addEventListener("input", updatePower);
updatePower();
runSample();
