import init, { constants, disk_fill, scan } from "./pkg/effuniv_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function report(el, f) {
  el.classList.remove("error");
  try {
    return f();
  } catch (e) {
    el.classList.add("error");
    el.textContent = String(e);
    return null;
  }
}

function parseComplex(text) {
  const m = text.replace(/\s+/g, "").match(/^([+-]?[\d.]+(?:e[+-]?\d+)?)?(?:([+-][\d.]*)i)?$/i);
  if (!m) throw new Error(`cannot read ${text} as a complex number`);
  const im = m[2] === undefined ? 0 : m[2] === "+" || m[2] === "-" ? Number(m[2] + "1") : Number(m[2]);
  return [Number(m[1] ?? 0), im];
}

function runConstants() {
  const out = $("c-out");
  report(out, () => {
    out.textContent = JSON.stringify(JSON.parse(constants(num("c-sigma"), num("c-eps"))), null, 2);
  });
}

let diskTarget = [0.6, -0.4];

function radii() {
  const a = num("d-a");
  const r = [];
  for (let n = 2; n <= num("d-n"); n++) r.push(Math.pow(n, -a));
  return new Float64Array(r);
}

function drawDisk() {
  const canvas = $("d-canvas");
  const ctx = canvas.getContext("2d");
  const r = radii();
  const reach = r.reduce((s, x) => s + x, 0);
  const scale = (canvas.width / 2 - 10) / reach;
  const px = ([x, y]) => [canvas.width / 2 + x * scale, canvas.height / 2 - y * scale];
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  ctx.arc(canvas.width / 2, canvas.height / 2, reach * scale, 0, 2 * Math.PI);
  ctx.stroke();
  const [tx, ty] = px(diskTarget);
  ctx.fillStyle = "#c00";
  ctx.fillRect(tx - 3, ty - 3, 6, 6);

  const out = $("d-out");
  const res = report(out, () => JSON.parse(disk_fill(r, diskTarget[0], diskTarget[1])));
  if (!res) return;
  ctx.strokeStyle = "#036";
  ctx.beginPath();
  res.path.forEach((p, i) => (i ? ctx.lineTo(...px(p)) : ctx.moveTo(...px(p))));
  ctx.stroke();
  out.textContent = `target ${diskTarget.map((x) => x.toFixed(3)).join(", ")}  residual ${res.residual.toExponential(2)}`;
  canvas.onclick = (ev) => {
    const b = canvas.getBoundingClientRect();
    diskTarget = [(ev.clientX - b.left - canvas.width / 2) / scale, (canvas.height / 2 - (ev.clientY - b.top)) / scale];
    drawDisk();
  };
}

function runScan() {
  const out = $("s-out");
  const res = report(out, () => {
    const [re, im] = parseComplex($("s-target").value);
    return JSON.parse(scan(num("s-sigma"), num("s-t0"), num("s-t1"), num("s-n"), re, im));
  });
  if (!res) return;
  out.textContent = `closest at t = ${res.best_t.toFixed(3)}, distance ${res.best_distance.toExponential(2)}`;

  const canvas = $("s-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const ts = res.values.map((v) => v[0]);
  const ys = res.values.flatMap((v) => [v[1], v[2]]);
  const [t0, t1] = [ts[0], ts[ts.length - 1]];
  const [lo, hi] = [Math.min(...ys), Math.max(...ys)];
  const x = (t) => ((t - t0) / (t1 - t0)) * canvas.width;
  const y = (v) => canvas.height - 10 - ((v - lo) / (hi - lo || 1)) * (canvas.height - 20);
  for (const [k, colour] of [[1, "#036"], [2, "#c60"]]) {
    ctx.strokeStyle = colour;
    ctx.beginPath();
    res.values.forEach((v, i) => (i ? ctx.lineTo(x(v[0]), y(v[k])) : ctx.moveTo(x(v[0]), y(v[k]))));
    ctx.stroke();
  }
  ctx.strokeStyle = "#c00";
  ctx.beginPath();
  ctx.moveTo(x(res.best_t), 0);
  ctx.lineTo(x(res.best_t), canvas.height);
  ctx.stroke();
}

await init();
$("c-run").onclick = runConstants;
$("s-run").onclick = runScan;
$("d-n").onchange = drawDisk;
$("d-a").onchange = drawDisk;
runConstants();
drawDisk();
