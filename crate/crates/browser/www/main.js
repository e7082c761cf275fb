import init, { influence, maxcon_heatmap, idla_image } from "./pkg/rotorwalk_browser.js";

const SEQUENCES = ["NE,SE,SW,NW", "NE,NW,SW,SE", "NE,NW,SE,SW", "NE,SW,SE,NW", "NE,SE,NW,SW", "NE,SW,NW,SE"];
const COLORS = { NE: "#d62728", SE: "#1f77b4", SW: "#2ca02c", NW: "#9467bd" };

const $ = (id) => document.getElementById(id);

function fail(node, e) {
  node.className = "err";
  node.textContent = String(e.message ?? e);
}

function fillSequences() {
  for (const sel of document.querySelectorAll("select[name=seq]")) {
    for (const s of SEQUENCES) sel.add(new Option(`(${s})`, s));
  }
}

function drawInfluence(data) {
  const c = $("inf-canvas");
  const g = c.getContext("2d");
  const pad = 40;
  g.clearRect(0, 0, c.width, c.height);
  const all = Object.values(data.curves).flat();
  const lo = Math.min(0, ...all), hi = Math.max(0, ...all);
  const t0 = data.times[0], t1 = data.times[data.times.length - 1];
  const sx = (t) => pad + ((t - t0) / Math.max(1, t1 - t0)) * (c.width - 2 * pad);
  const sy = (y) => c.height - pad - ((y - lo) / (hi - lo || 1)) * (c.height - 2 * pad);
  g.strokeStyle = "#bbb";
  g.beginPath(); g.moveTo(pad, sy(0)); g.lineTo(c.width - pad, sy(0)); g.stroke();
  g.setLineDash([4, 4]);
  for (const t of data.extremal_times) {
    g.beginPath(); g.moveTo(sx(t), pad / 2); g.lineTo(sx(t), c.height - pad); g.stroke();
    g.fillStyle = "#666"; g.fillText(t, sx(t) + 2, c.height - pad + 14);
  }
  g.setLineDash([]);
  for (const [dir, ys] of Object.entries(data.curves)) {
    g.strokeStyle = COLORS[dir];
    g.beginPath();
    ys.forEach((y, i) => (i ? g.lineTo : g.moveTo).call(g, sx(data.times[i]), sy(y)));
    g.stroke();
  }
  $("inf-legend").innerHTML = Object.keys(COLORS)
    .map((d) => `<span style="color:${COLORS[d]}">■ INF(x, ${d}, t)</span>`).join("");
}

function showInfluence(e) {
  e?.preventDefault();
  const f = new FormData($("inf-form"));
  const summary = $("inf-summary");
  summary.className = "";
  try {
    const data = JSON.parse(influence(+f.get("x1"), +f.get("x2"), f.get("seq"), +f.get("tmax")));
    drawInfluence(data);
    const sched = data.schedule.map((s) => `${s.t}: ${s.dirs.join(" ")}`).join(", ") || "none";
    summary.textContent =
      `MAXCON = ${data.maxcon.numer}/${data.maxcon.denom} ≈ ${data.maxcon.value.toFixed(6)}; odd chips ${sched}`;
    $("inf-phases").innerHTML = "<tr><th>phase</th><th>block</th><th>monotonicity</th></tr>" +
      data.phases.map((p) => `<tr><td>[${p.lo}, ${p.hi ?? "∞"}]</td><td>${p.block.join(" ")}</td><td>${p.signature}</td></tr>`).join("");
  } catch (err) {
    fail(summary, err);
  }
}

function showHeatmap(e) {
  e?.preventDefault();
  const f = new FormData($("heat-form"));
  const r = +f.get("radius");
  const summary = $("heat-summary");
  summary.className = "";
  try {
    const vals = maxcon_heatmap(r, f.get("seq"));
    const side = 2 * r + 1;
    const finite = Array.from(vals).filter(Number.isFinite);
    const max = Math.max(...finite);
    const img = new ImageData(side, side);
    vals.forEach((v, i) => {
      const k = Number.isFinite(v) ? Math.sqrt(v / max) : -1;
      const px = k < 0 ? [240, 240, 240] : [255 * k, 80 * k, 255 * (1 - k)];
      img.data.set([...px, 255], 4 * i);
    });
    const c = $("heat-canvas");
    const tmp = new OffscreenCanvas(side, side);
    tmp.getContext("2d").putImageData(img, 0, 0);
    const g = c.getContext("2d");
    g.imageSmoothingEnabled = false;
    g.clearRect(0, 0, c.width, c.height);
    g.drawImage(tmp, 0, 0, c.width, c.height);
    const total = finite.reduce((a, b) => a + b, 0);
    summary.textContent = `sum over |x|∞ ≤ ${r}: ${total.toFixed(6)}; largest ${max.toFixed(6)}`;
  } catch (err) {
    fail(summary, err);
  }
}

function showIdla(e) {
  e?.preventDefault();
  const f = new FormData($("idla-form"));
  const summary = $("idla-summary");
  summary.className = "";
  try {
    const seed = f.get("init") === "random" ? +f.get("seed") : -1;
    const img = idla_image(+f.get("n"), f.get("seq"), seed);
    const c = $("idla-canvas");
    c.width = img.width;
    c.height = img.height;
    c.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(img.pixels()), img.width, img.height), 0, 0);
    c.style.width = `${Math.max(300, img.width)}px`;
    summary.textContent = `Δ(n) = ${img.delta.toFixed(4)}, max Δ = ${img.max_delta.toFixed(4)}; up red, left yellow, down green, right blue`;
    img.free();
  } catch (err) {
    fail(summary, err);
  }
}

await init();
fillSequences();
$("status").textContent = "";
$("inf-form").addEventListener("submit", showInfluence);
$("heat-form").addEventListener("submit", showHeatmap);
$("idla-form").addEventListener("submit", showIdla);
showInfluence();
showHeatmap();
showIdla();
