import init, { classifyMatrix, locatePoint, diagramSvg } from "./pkg/orbitlab_web.js";

const $ = (id) => document.getElementById(id);

function rotation(t1, t2) {
  const m = [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]];
  [t1, t2].forEach((t, k) => {
    m[k][k] = Math.cos(t);
    m[k][k + 2] = -Math.sin(t);
    m[k + 2][k] = Math.sin(t);
    m[k + 2][k + 2] = Math.cos(t);
  });
  return m;
}

const examples = {
  rotation: () => rotation(0.7, 2.2),
  identity: () => [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
  saddle: () => {
    const m = rotation(0, 1.1);
    const c = Math.cosh(0.8), s = Math.sinh(0.8);
    m[0][0] = c; m[0][2] = s; m[2][0] = s; m[2][2] = c;
    return m;
  },
};

function fmt(rows) {
  return "[\n" + rows.map((r) => "  [" + r.map((v) => v.toFixed(12)).join(", ") + "]").join(",\n") + "\n]";
}

function showPoint() {
  const x = parseFloat($("px").value), y = parseFloat($("py").value);
  $("pxv").textContent = x.toFixed(2);
  $("pyv").textContent = y.toFixed(2);
  try {
    $("point-out").textContent = locatePoint(x, y);
    $("point-svg").innerHTML = diagramSvg(JSON.stringify([{ x, y }]), 4);
    $("point-out").classList.remove("error");
  } catch (e) {
    $("point-out").textContent = e.message;
    $("point-out").classList.add("error");
  }
}

function draw() {
  try {
    $("diagram").innerHTML = diagramSvg($("points").value, parseInt($("kmax").value, 10));
    $("diagram-err").textContent = "";
  } catch (e) {
    $("diagram-err").textContent = e.message;
  }
}

function classify() {
  try {
    $("matrix-out").textContent = classifyMatrix($("matrix").value, $("unreduced").checked);
    $("matrix-out").classList.remove("error");
  } catch (e) {
    $("matrix-out").textContent = e.message;
    $("matrix-out").classList.add("error");
  }
}

await init();
$("px").addEventListener("input", showPoint);
$("py").addEventListener("input", showPoint);
$("draw").addEventListener("click", draw);
$("classify").addEventListener("click", classify);
document.querySelectorAll("[data-example]").forEach((b) =>
  b.addEventListener("click", () => {
    $("matrix").value = fmt(examples[b.dataset.example]());
    classify();
  })
);
$("matrix").value = fmt(examples.rotation());
showPoint();
draw();
classify();
