import init, { curvatureSummary, scalarSlice, gqeProfile, instanceKeys } from "./pkg/gqe_web.js";

const $ = (id) => document.getElementById(id);
let instances = [];

function current() {
  return instances.find((i) => i.key === $("instance").value);
}

function fail(target, e) {
  target.textContent = String(e);
  target.classList.add("err");
}

function evaluate() {
  const out = $("summary");
  out.classList.remove("err");
  try {
    const v = JSON.parse(curvatureSummary(current().key, $("point").value));
    out.textContent = JSON.stringify(v, (k, x) => (typeof x === "number" ? Number(x.toPrecision(8)) : x), 2);
  } catch (e) {
    fail(out, e);
  }
}

// Blue through white to red, symmetric about zero when the range straddles it.
function color(t) {
  const r = t < 0.5 ? Math.round(510 * t) : 255;
  const b = t > 0.5 ? Math.round(510 * (1 - t)) : 255;
  const g = Math.round(255 - 300 * Math.abs(t - 0.5));
  return [r, Math.max(g, 0), b];
}

function drawSlice() {
  const inst = current();
  const i = Number($("axis-i").value) - 1;
  const j = Number($("axis-j").value) - 1;
  const res = Number($("res").value);
  const legend = $("legend");
  legend.classList.remove("err");
  let grid;
  try {
    grid = scalarSlice(inst.key, i, j, res);
  } catch (e) {
    fail(legend, e);
    return;
  }
  const finite = Array.from(grid).filter(Number.isFinite);
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo < 0 && hi > 0) {
    const m = Math.max(-lo, hi);
    lo = -m;
    hi = m;
  }
  const span = hi - lo || 1;
  const canvas = $("heat");
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(res, res);
  // Row a is x_i, column b is x_j; draw x_i upwards.
  for (let a = 0; a < res; a++) {
    for (let b = 0; b < res; b++) {
      const v = grid[a * res + b];
      const k = 4 * ((res - 1 - a) * res + b);
      const [r, g, bl] = Number.isFinite(v) ? color((v - lo) / span) : [235, 235, 235];
      img.data.set([r, g, bl, 255], k);
    }
  }
  const off = new OffscreenCanvas(res, res);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
  legend.innerHTML =
    `x${j + 1} →, x${i + 1} ↑<br>min R = ${Math.min(...finite).toPrecision(6)}<br>` +
    `max R = ${Math.max(...finite).toPrecision(6)}<br>grey: outside the chart`;
}

function drawProfile() {
  const box = $("class");
  box.classList.remove("err");
  let v;
  try {
    v = JSON.parse(gqeProfile(current().key, 160));
  } catch (e) {
    fail(box, e);
    return;
  }
  const series = [
    { name: "μ", data: v.mu, color: "#c0392b" },
    { name: "λ", data: v.lambda, color: "#2471a3" },
    { name: "|W(∇f)|", data: v.radial_weyl, color: "#229954" },
  ];
  const canvas = $("plot");
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 34;
  const xs = v.x1;
  const all = series.flatMap((s) => s.data.filter((y) => y !== null && Number.isFinite(y)));
  const lo = Math.min(0, ...all), hi = Math.max(0, ...all);
  const sx = (x) => pad + ((x - xs[0]) / (xs[xs.length - 1] - xs[0] || 1)) * (W - 2 * pad);
  const sy = (y) => H - pad - ((y - lo) / (hi - lo || 1)) * (H - 2 * pad);
  ctx.clearRect(0, 0, W, H);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, sy(0));
  ctx.lineTo(W - pad, sy(0));
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.font = "11px monospace";
  ctx.fillText(hi.toPrecision(3), 2, sy(hi) + 4);
  ctx.fillText(lo.toPrecision(3), 2, sy(lo));
  ctx.fillText(`x1 = ${xs[0].toFixed(2)}`, pad, H - 8);
  ctx.fillText(`${xs[xs.length - 1].toFixed(2)}`, W - pad - 30, H - 8);
  series.forEach((s, k) => {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    let pen = false;
    s.data.forEach((y, n) => {
      if (y === null || !Number.isFinite(y)) {
        pen = false;
        return;
      }
      pen ? ctx.lineTo(sx(xs[n]), sy(y)) : ctx.moveTo(sx(xs[n]), sy(y));
      pen = true;
    });
    ctx.stroke();
    ctx.fillStyle = s.color;
    ctx.fillText(s.name, W - pad - 60, 14 + 14 * k);
  });
  box.textContent = JSON.stringify(v.classification, null, 2);
}

function selectInstance() {
  $("point").value = current().center.map((x) => x.toFixed(2)).join(", ");
  evaluate();
  drawSlice();
  drawProfile();
}

await init();
instances = JSON.parse(instanceKeys());
for (const inst of instances) {
  const o = document.createElement("option");
  o.value = inst.key;
  o.textContent = `${inst.key}: ${inst.name}`;
  $("instance").append(o);
}
$("instance").addEventListener("change", selectInstance);
$("at").addEventListener("click", evaluate);
$("slice").addEventListener("click", drawSlice);
$("profile").addEventListener("click", drawProfile);
selectInstance();
