import init, { splineSvg, userStyleSvg, ctcDemo } from "./pkg/swipegan_web.js";

const $ = (id) => document.getElementById(id);

function show(target, render) {
  try {
    target.innerHTML = render();
  } catch (e) {
    target.innerHTML = `<p class="error">${String(e)}</p>`;
  }
}

function drawSpline() {
  show($("spline-out"), () => splineSvg($("spline-word").value.trim()));
}

function drawStyle() {
  show($("style-out"), () =>
    userStyleSvg(
      $("style-word").value.trim(),
      Number($("overshoot").value),
      Number($("excursion").value),
      Number($("corner").value),
      Number($("warp").value),
      Number($("style-seed").value) >>> 0,
    ),
  );
}

function runCtc() {
  show($("ctc-out"), () => {
    const d = JSON.parse(ctcDemo($("ctc-word").value.trim(), Number($("ctc-steps").value), Number($("ctc-seed").value) >>> 0));
    const head = "<tr><th>t</th><th>a</th><th>b</th><th>c</th><th>blank</th></tr>";
    const rows = d.probs
      .map((r, t) => `<tr><td>${t}</td>${r.map((p) => `<td>${p.toFixed(3)}</td>`).join("")}</tr>`)
      .join("");
    return `<p>forward-backward loss ${d.forward_backward.toFixed(9)}<br>
      brute-force loss ${d.brute_force.toFixed(9)}<br>
      greedy decode "${d.greedy}"</p><table>${head}${rows}</table>`;
  });
}

await init();
for (const id of ["spline-word"]) $(id).addEventListener("input", drawSpline);
for (const id of ["style-word", "overshoot", "excursion", "corner", "warp", "style-seed"]) {
  $(id).addEventListener("input", drawStyle);
}
for (const id of ["ctc-word", "ctc-steps", "ctc-seed"]) $(id).addEventListener("input", runCtc);
drawSpline();
drawStyle();
runCtc();
