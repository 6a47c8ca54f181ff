// Generated by: wasm-bindgen --target web --out-dir www/pkg heatctl_wasm.wasm
import init, { gammaCurve, synthesize, simulate } from "./pkg/heatctl_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function fail(el, err) {
  el.className = "error";
  el.textContent = String(err.message ?? err);
}

// Line plot of several series; log scale on y when requested.
function plot(canvas, xs, series, { logY = false } = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const tf = (v) => (logY ? Math.log10(Math.max(v, 1e-300)) : v);
  const ys = series.flatMap((s) => s.values.map(tf)).filter(Number.isFinite);
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const [x0, x1] = [xs[0], xs[xs.length - 1]];
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (y) => h - pad - ((tf(y) - y0) / (y1 - y0 || 1)) * (h - 2 * pad);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.font = "12px sans-serif";
  ctx.fillText(logY ? `1e${y1.toFixed(1)}` : y1.toPrecision(3), 2, pad);
  ctx.fillText(logY ? `1e${y0.toFixed(1)}` : y0.toPrecision(3), 2, h - pad);
  ctx.fillText(String(x0), pad, h - pad + 15);
  ctx.fillText(String(x1), w - pad - 20, h - pad + 15);
  series.forEach((s, k) => {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    s.values.forEach((v, i) => (i ? ctx.lineTo(px(xs[i]), py(v)) : ctx.moveTo(px(xs[i]), py(v))));
    ctx.stroke();
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, w - pad - 150, pad + 16 * (k + 1));
  });
}

function runCurve() {
  const msg = $("gc-msg");
  msg.className = "";
  try {
    const rows = JSON.parse(gammaCurve(num("gc-q"), num("gc-sigma"), 1, num("gc-nmax")));
    const ns = rows.map((r) => r.N);
    plot($("gc-plot"), ns, [
      { label: "harmonic", color: "#d9730d", values: rows.map((r) => r.harmonic) },
      { label: "Sobolev", color: "#1f5fbf", values: rows.map((r) => r.sobolev) },
    ], { logY: true });
    const last = rows[rows.length - 1];
    msg.textContent = `N = ${ns[0]}..${last.N}; ratio at N = ${last.N}: ${last.ratio.toFixed(4)}`;
  } catch (e) {
    fail(msg, e);
  }
}

function runSynthesis() {
  const out = $("sy-out");
  out.className = "";
  try {
    const r = JSON.parse(synthesize(num("sy-q"), num("sy-sigma"), num("sy-n"), $("sy-method").value));
    out.textContent = JSON.stringify(r, null, 2);
  } catch (e) {
    fail(out, e);
  }
}

function runSimulation() {
  const msg = $("si-msg");
  msg.className = "";
  msg.textContent = "running...";
  // let the message paint before the blocking call
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const r = JSON.parse(simulate(num("si-q"), num("si-sigma"), num("si-n"), num("si-t"), num("si-h")));
      plot($("si-plot"), r.t, [
        { label: "||z(t)||", color: "#1f5fbf", values: r.state_norm },
        { label: "|e(t)|", color: "#d9730d", values: r.err_norm },
      ], { logY: true });
      const n = r.t.length - 1;
      const ratio = r.state_norm[n] / r.state_norm[0];
      msg.textContent = `final / initial norm: ${ratio.toExponential(3)} (${(performance.now() - t0).toFixed(0)} ms)`;
    } catch (e) {
      fail(msg, e);
    }
  }, 10);
}

await init();
$("gc-run").onclick = runCurve;
$("sy-run").onclick = runSynthesis;
$("si-run").onclick = runSimulation;
runCurve();
