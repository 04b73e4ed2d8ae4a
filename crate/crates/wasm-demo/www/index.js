// Built with: wasm-pack build --target web --out-dir www/pkg crates/wasm-demo
import init, { radial_profiles, Simulation } from "./pkg/oseen_wasm_demo.js";

const N = 128, HALF_WIDTH = 16, DT = 0.05, STEPS_PER_FRAME = 2;
const $ = (id) => document.getElementById(id);

function drawProfiles() {
  const t = Math.pow(10, Number($("pt").value)) - 0.01;
  $("pt-val").textContent = t.toFixed(2);
  const ri = Number($("ri").value), ro = Number($("ro").value);
  let data;
  try {
    data = radial_profiles(t, ri, ro, Math.max(4 * ro, 3 * Math.sqrt(1 + t)), 400);
  } catch (e) {
    return;
  }
  const cv = $("profiles"), ctx = cv.getContext("2d");
  ctx.clearRect(0, 0, cv.width, cv.height);
  const rows = data.length / 4, rMax = data[4 * (rows - 1)];
  const colours = ["#c33", "#36c", "#393"];
  for (let c = 1; c <= 3; c++) {
    let m = 0;
    for (let k = 0; k < rows; k++) m = Math.max(m, Math.abs(data[4 * k + c]));
    ctx.strokeStyle = colours[c - 1];
    ctx.beginPath();
    for (let k = 0; k < rows; k++) {
      const x = (data[4 * k] / rMax) * cv.width;
      const y = cv.height - 10 - (m > 0 ? data[4 * k + c] / m : 0) * (cv.height - 20);
      k === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    }
    ctx.stroke();
  }
}

let sim = null, running = false;

function reset() {
  running = false;
  $("run").textContent = "run";
  try {
    sim = new Simulation(N, HALF_WIDTH, DT, Number($("alpha").value), Number($("amp").value), $("preset").value);
  } catch (e) {
    $("diag").textContent = String(e);
    sim = null;
    return;
  }
  drawField();
}

function drawField() {
  const px = sim.render_rgba($("pert").checked);
  const img = new ImageData(new Uint8ClampedArray(px), N, N);
  const off = new OffscreenCanvas(N, N);
  off.getContext("2d").putImageData(img, 0, 0);
  const ctx = $("field").getContext("2d");
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, $("field").width, $("field").height);
  const d = sim.diagnostics();
  const names = ["t", "|v|", "|grad v|", "|u-aT|", "|grad(u-aT)|", "|w-aX|_1", "tail", "circ"];
  $("diag").textContent = names.map((n, i) => `${n.padEnd(13)}${d[i].toExponential(4)}`).join("\n");
}

function frame() {
  if (!running || !sim) return;
  try {
    sim.step(STEPS_PER_FRAME);
  } catch (e) {
    running = false;
    $("diag").textContent = String(e);
    return;
  }
  drawField();
  requestAnimationFrame(frame);
}

await init();
for (const id of ["pt", "ri", "ro"]) $(id).addEventListener("input", drawProfiles);
$("reset").addEventListener("click", reset);
$("pert").addEventListener("change", () => sim && drawField());
$("run").addEventListener("click", () => {
  if (!sim) return;
  running = !running;
  $("run").textContent = running ? "pause" : "run";
  if (running) requestAnimationFrame(frame);
});
drawProfiles();
reset();
