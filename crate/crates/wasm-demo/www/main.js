// Built by `wasm-pack build --target web --out-dir www/pkg` (see README).
import init, { fit_trajectory, purify_qubit, tomography } from "./pkg/purifier_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function report(el, fn) {
  try {
    el.classList.remove("err");
    fn();
  } catch (e) {
    el.classList.add("err");
    el.textContent = String(e.message ?? e);
  }
}

// Lines and marker series on a shared axis box; y range fixed to [lo, hi].
function plot(canvas, t, lines, markers, lo, hi) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 30;
  ctx.clearRect(0, 0, w, h);
  const x = (v) => pad + (v - t[0]) / (t[t.length - 1] - t[0]) * (w - 2 * pad);
  const y = (v) => h - pad - (v - lo) / (hi - lo) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#666";
  ctx.fillText(String(hi), 2, pad + 4);
  ctx.fillText(String(lo), 2, h - pad + 4);
  ctx.fillText(`t = ${t[t.length - 1]}`, w - pad - 40, h - 8);
  for (const { data, color } of lines) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    data.forEach((v, i) => (i ? ctx.lineTo(x(t[i]), y(v)) : ctx.moveTo(x(t[i]), y(v))));
    ctx.stroke();
  }
  for (const { data, color } of markers) {
    ctx.fillStyle = color;
    data.forEach((v, i) => ctx.fillRect(x(t[i]) - 2, y(v) - 2, 4, 4));
  }
}

function trajectoryArgs() {
  return [num("tr-delta"), num("tr-omega"), num("tr-gamma"), num("tr-tmax"), num("tr-n")];
}

function runTrajectory() {
  report($("tr-out"), () => {
    const r = JSON.parse(fit_trajectory(...trajectoryArgs()));
    plot($("tr-plot"), r.t,
      [{ data: r.exact_excited, color: "#1f77b4" }, { data: r.exact_coherence.map((c) => c[0]), color: "#2ca02c" }],
      [{ data: r.fit_excited, color: "#d62728" }], -0.5, 1);
    $("tr-out").textContent =
      `mean distance ${r.mean_distance.toExponential(2)}, max distance ${r.max_distance.toExponential(2)}, ` +
      `max fit residual ${Math.max(...r.residual).toExponential(2)}`;
  });
}

function runPurify() {
  report($("pu-out"), () => {
    const r = JSON.parse(purify_qubit(num("pu-p"), num("pu-re"), num("pu-im")));
    const amp = r.amplitudes_re.map((re, i) => {
      const im = r.amplitudes_im[i];
      const label = ["|00>", "|01>", "|10>", "|11>"][i];
      return `  ${label}  ${re.toFixed(4)} ${im < 0 ? "-" : "+"} ${Math.abs(im).toFixed(4)}i`;
    });
    $("pu-out").textContent = [
      `weights ${r.weights.map((w) => w.toFixed(4)).join(", ")}`,
      `entanglement entropy ${r.entropy.toFixed(4)} nats, purity ${r.purity.toFixed(4)}`,
      "system-bath amplitudes (system, bath):",
      ...amp,
      `round trip ||Tr_B|psi><psi| - rho|| = ${r.round_trip_error.toExponential(2)}`,
    ].join("\n");
  });
}

function runTomography() {
  report($("to-out"), () => {
    const r = JSON.parse(tomography(...trajectoryArgs(), num("to-shots"), num("to-seed")));
    plot($("to-plot"), r.t,
      [{ data: r.exact_bloch.map((b) => b[2]), color: "#1f77b4" }, { data: r.exact_bloch.map((b) => b[0]), color: "#2ca02c" }],
      [{ data: r.measured_bloch.map((b) => b[2]), color: "#d62728" }], -1, 1);
    $("to-out").textContent =
      `distance ${r.mean_distance.toFixed(4)} +/- ${r.std_distance.toFixed(4)} over ${r.t.length} points ` +
      "(mean and population std of Frobenius distances)";
  });
}

await init();
$("tr-run").addEventListener("click", runTrajectory);
$("to-run").addEventListener("click", runTomography);
for (const id of ["pu-p", "pu-re", "pu-im"]) $(id).addEventListener("input", runPurify);
runTrajectory();
runPurify();
