import init, { response_curve, recover } from "./pkg/rodshape_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

const presets = {
  1: { kind: "quartic", a: 1, b: 1, E: 3, r: 4, p: 2, start: 1, stop: 2, count: 12 },
  2: { kind: "exponential", a: 1, b: 1, E: 3, r: 4, p: 2, start: 1, stop: 9, count: 81 },
  3: { kind: "bump_pair_cos", E: 4, r: 3, p: 2, start: 0.1, stop: 20, count: 101 },
  4: { kind: "bump_pair_exp", E: 4, r: 3, p: 2, start: 0.1, stop: 50, count: 201 },
};

function profileJson() {
  const kind = $("kind").value;
  if (kind === "quartic" || kind === "exponential") {
    return JSON.stringify({ kind, params: { a: num("a"), b: num("b") } });
  }
  return JSON.stringify({ kind });
}

function status(text, error = false) {
  $("status").textContent = text;
  $("status").className = error ? "error" : "";
}

// Draws each series as a polyline; NaN breaks the line.
function plot(canvas, xs, series) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, width, height);
  const finite = series.flatMap((s) => s.ys.filter(Number.isFinite));
  let lo = Math.min(...finite), hi = Math.max(...finite);
  if (!(hi > lo)) { lo -= 1; hi += 1; }
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (width - 2 * pad);
  const py = (y) => height - pad + ((lo - y) / (hi - lo)) * (height - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);
  ctx.fillText(hi.toPrecision(4), 2, pad + 4);
  ctx.fillText(lo.toPrecision(4), 2, height - pad);
  ctx.fillText(x0.toPrecision(3), pad, height - pad + 14);
  ctx.fillText(x1.toPrecision(3), width - pad - 20, height - pad + 14);

  for (const { ys, color, dots } of series) {
    ctx.strokeStyle = ctx.fillStyle = color;
    ctx.beginPath();
    let pen = false;
    ys.forEach((y, i) => {
      if (!Number.isFinite(y)) { pen = false; return; }
      const X = px(xs[i]), Y = py(y);
      if (dots) ctx.fillRect(X - 2, Y - 2, 4, 4);
      pen ? ctx.lineTo(X, Y) : ctx.moveTo(X, Y);
      pen = true;
    });
    ctx.stroke();
  }
}

function runResponse() {
  try {
    const c = response_curve(profileJson(), num("E"), num("r"), num("p"), num("start"), num("stop"), num("count"));
    const omega = Array.from(c.omega), f = Array.from(c.f_tilde);
    plot($("response"), omega, [{ ys: f, color: "#1f5fbf", dots: true }]);
    status(`${omega.length} samples`);
  } catch (e) {
    status(String(e), true);
  }
}

function runRecover() {
  status("recovering...");
  // let the status repaint before the synchronous solve
  setTimeout(() => {
    const t0 = performance.now();
    try {
      const rec = recover(
        profileJson(), num("E"), num("r"), num("p"), num("start"), num("stop"), num("count"),
        num("delta"), num("seed"), num("eigenpairs"),
      );
      const x = Array.from(rec.x);
      plot($("profile"), x, [
        { ys: Array.from(rec.true_area), color: "#aaa" },
        { ys: Array.from(rec.area), color: "#1f5fbf" },
      ]);
      const log = (v) => Array.from(v, (y) => (y > 0 ? Math.log10(y) : NaN));
      plot($("orders"), Array.from(rec.orders), [
        { ys: log(rec.q), color: "#aaa", dots: true },
        { ys: log(rec.r), color: "#1f5fbf", dots: true },
      ]);
      const ms = (performance.now() - t0).toFixed(0);
      status(`N* = ${rec.n_star}, ${rec.eigen_count} eigenpairs, sup relative error ${rec.sup_error.toExponential(2)}, ${ms} ms`);
      rec.free();
    } catch (e) {
      status(String(e), true);
    }
  }, 10);
}

function applyPreset(n) {
  const p = presets[n];
  $("kind").value = p.kind;
  for (const key of ["a", "b", "E", "r", "p", "start", "stop", "count"]) {
    if (p[key] !== undefined) $(key).value = p[key];
  }
  runResponse();
}

await init();
$("run-response").onclick = runResponse;
$("run-recover").onclick = runRecover;
document.querySelectorAll("[data-preset]").forEach((b) => (b.onclick = () => applyPreset(b.dataset.preset)));
status("ready");
runResponse();
