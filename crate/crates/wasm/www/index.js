import init, { portrait, stabilize_matrix, transient, preset } from "../pkg/specto_wasm.js";

const $ = (id) => document.getElementById(id);

function fmt(x) {
  return typeof x === "number" ? x.toPrecision(6) : String(x);
}

function summary(a) {
  return [
    `ρ(W)      ${fmt(a.spectral_radius)}`,
    `‖W‖₂      ${fmt(a.spectral_norm)}`,
    `henrici   ${fmt(a.henrici)}`,
    `departure ${fmt(a.schur_departure)}`,
    `kreiss ≥  ${fmt(a.kreiss_lower_bound)}`,
  ].join("\n");
}

function run(action) {
  $("error").textContent = "";
  try {
    action();
  } catch (e) {
    $("error").textContent = e.message ?? String(e);
  }
}

function inputs() {
  return {
    csv: $("matrix").value,
    nodes: Number($("nodes").value),
    levels: $("levels").value,
  };
}

function showPortrait() {
  const { csv, nodes, levels } = inputs();
  const out = JSON.parse(portrait(csv, nodes, levels));
  $("figure").innerHTML = out.svg;
  $("stats").textContent = summary(out.analysis);
}

function showStabilize() {
  const { csv, nodes, levels } = inputs();
  const m = Number($("iterations").value);
  const out = JSON.parse(stabilize_matrix(csv, m, 0, nodes, levels));
  $("figure").innerHTML = out.svg;
  $("stats").textContent =
    `gain estimate ${fmt(out.gain_estimate)}\n\nbefore\n${summary(out.before)}\n\nafter\n${summary(out.after)}`;
}

function growthPlot(norms, lower, upper) {
  const w = 640, h = 320, m = 40;
  const values = norms.concat([lower, upper]).filter((v) => v > 0);
  const lo = Math.log10(Math.min(...values)), hi = Math.log10(Math.max(...values));
  const span = hi - lo || 1;
  const x = (k) => m + (k / Math.max(1, norms.length - 1)) * (w - 2 * m);
  const y = (v) => h - m - ((Math.log10(Math.max(v, 1e-300)) - lo) / span) * (h - 2 * m);
  const pts = norms.map((v, k) => `${x(k).toFixed(1)},${y(v).toFixed(1)}`).join(" ");
  const hline = (v, colour, label) =>
    `<line x1="${m}" x2="${w - m}" y1="${y(v)}" y2="${y(v)}" stroke="${colour}" stroke-dasharray="4 3"/>` +
    `<text x="${w - m}" y="${y(v) - 4}" text-anchor="end" font-size="11" fill="${colour}">${label}</text>`;
  return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${w} ${h}" width="${w}" height="${h}">
    <rect x="${m}" y="${m}" width="${w - 2 * m}" height="${h - 2 * m}" fill="none" stroke="#999"/>
    ${hline(lower, "#2a788e", "Kreiss lower bound")}
    ${hline(upper, "#b00020", "e·n × lower bound")}
    <polyline points="${pts}" fill="none" stroke="#222" stroke-width="1.5"/>
    <text x="${w / 2}" y="${h - 8}" text-anchor="middle" font-size="12">k</text>
    <text x="12" y="${h / 2}" font-size="12" transform="rotate(-90 12 ${h / 2})" text-anchor="middle">‖W^k‖₂ (log)</text>
  </svg>`;
}

function showTransient() {
  const { csv, nodes, levels } = inputs();
  const out = JSON.parse(transient(csv, Number($("steps").value), nodes, levels));
  $("figure").innerHTML = growthPlot(out.power_norms, out.kreiss_lower_bound, out.kreiss_upper_bound);
  $("stats").textContent = [
    `ρ(W)          ${fmt(out.spectral_radius)}`,
    `peak ‖W^k‖₂   ${fmt(out.peak)} at k = ${out.peak_step}`,
    `Kreiss bounds [${fmt(out.kreiss_lower_bound)}, ${fmt(out.kreiss_upper_bound)}]`,
  ].join("\n");
}

function loadPreset() {
  $("matrix").value = preset($("preset").value) ?? "";
}

await init();
$("preset").addEventListener("change", () => run(() => { loadPreset(); showPortrait(); }));
$("btn-portrait").addEventListener("click", () => run(showPortrait));
$("btn-stabilize").addEventListener("click", () => run(showStabilize));
$("btn-transient").addEventListener("click", () => run(showTransient));
loadPreset();
run(showPortrait);
