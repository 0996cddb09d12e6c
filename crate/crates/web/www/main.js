import init, { WaveStudio } from "./pkg/wavegest_web.js";

const JOINTS = ["shoulder pitch", "shoulder roll", "elbow", "forearm roll", "wrist"];
const $ = (id) => document.getElementById(id);
const SVG_NS = "http://www.w3.org/2000/svg";

let studio = null;
const clamped = new Set();

function status(text, isError = false) {
  $("status").textContent = text;
  $("status").className = isError ? "error" : "";
}

function run(action) {
  try {
    action();
  } catch (e) {
    status(String(e), true);
  }
}

function drawSpectrum() {
  const svg = $("spectrum");
  svg.replaceChildren();
  const dofs = studio.dofs();
  const k = studio.harmonics();
  const amps = studio.spectrum();
  const top = Math.max(...amps);
  const groupWidth = 960 / dofs;
  const barWidth = (groupWidth - 16) / k;
  for (let d = 0; d < dofs; d++) {
    for (let h = 1; h <= k; h++) {
      const a = amps[d * k + h - 1];
      const height = 180 * Math.sqrt(a / top);
      const bar = document.createElementNS(SVG_NS, "rect");
      bar.setAttribute("x", d * groupWidth + (h - 1) * barWidth);
      bar.setAttribute("y", 190 - height);
      bar.setAttribute("width", Math.max(barWidth - 1, 1));
      bar.setAttribute("height", height);
      if (clamped.has(`${d}:${h}`)) bar.classList.add("clamped");
      const tip = document.createElementNS(SVG_NS, "title");
      tip.textContent = `${JOINTS[d] ?? "joint " + d}, k=${h}: ${a.toPrecision(4)} rad`;
      bar.appendChild(tip);
      svg.appendChild(bar);
    }
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", d * groupWidth);
    label.setAttribute("y", 208);
    label.textContent = JOINTS[d] ?? `joint ${d}`;
    svg.appendChild(label);
  }
}

function showHint() {
  if (!studio) return;
  run(() => {
    const [median, spread] = studio.amplitudeStats(Number($("dof").value), Number($("harmonic").value));
    const z = Math.abs(Math.log(Number($("amp").value) / median)) / spread;
    const far = z > 3 ? " This clamp is far outside the demonstrations, so coupled harmonics will swing wildly." : "";
    $("hint").textContent = `Demonstrations: median ${median.toPrecision(3)} rad, log spread ${spread.toFixed(2)}; clamp is ${z.toFixed(1)} spreads away.${far}`;
  });
}

function train() {
  run(() => {
    const t0 = performance.now();
    studio?.free();
    studio = new WaveStudio(Number($("train-seed").value), Number($("harmonics").value));
    clamped.clear();
    $("dof").replaceChildren(...JOINTS.slice(0, studio.dofs()).map((name, d) => new Option(name, d)));
    $("dof").value = "2";
    $("harmonic").max = studio.harmonics();
    $("harmonic").value = Math.min(Number($("harmonic").value), studio.harmonics());
    for (const id of ["clamp", "release", "render"]) $(id).disabled = false;
    drawSpectrum();
    showHint();
    status(`Trained on 15 demonstrations in ${(performance.now() - t0).toFixed(0)} ms.`);
  });
}

function clamp() {
  run(() => {
    const d = Number($("dof").value);
    const h = Number($("harmonic").value);
    studio.clampAmplitude(d, h, Number($("amp").value));
    clamped.add(`${d}:${h}`);
    drawSpectrum();
    status(`${studio.clampCount()} amplitude(s) clamped.`);
  });
}

function release() {
  studio.release();
  clamped.clear();
  drawSpectrum();
  status("Clamps released.");
}

function render() {
  run(() => {
    const r = studio.render(Number($("sample-seed").value), Number($("tempo").value), Number($("stride").value));
    $("overlay").innerHTML = r.svg;
    const note = r.violations ? `, ${r.violations} samples outside joint limits (red)` : "";
    status(`Drew ${r.frames} poses${note}.`);
    r.free();
  });
}

$("train").addEventListener("click", train);
$("clamp").addEventListener("click", clamp);
$("release").addEventListener("click", release);
$("render").addEventListener("click", render);
for (const id of ["dof", "harmonic", "amp"]) $(id).addEventListener("input", showHint);
$("tempo").addEventListener("input", () => ($("tempo-out").textContent = Number($("tempo").value).toFixed(1)));

await init();
status("Ready. Train a model to begin.");
