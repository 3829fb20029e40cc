import init, { presets, simulate, discover_boundary, sweep_partial } from "../pkg/causal_scope_wasm.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function clear(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "11px system-ui";
  return ctx;
}

function drawSimulation(traces) {
  const canvas = $("sim-canvas");
  const ctx = clear(canvas);
  const rows = Math.ceil(traces.length / 2);
  const w = canvas.width / 2, h = canvas.height / rows;
  traces.forEach((tr, k) => {
    const x0 = (k % 2) * w, y0 = Math.floor(k / 2) * h;
    const all = tr.still.concat(tr.driven);
    const lo = Math.min(...all), hi = Math.max(...all);
    const span = hi - lo || 1;
    const line = (ys, dashed) => {
      ctx.setLineDash(dashed ? [4, 3] : []);
      ctx.beginPath();
      ys.forEach((y, t) => {
        const px = x0 + 4 + (t / (ys.length - 1)) * (w - 8);
        const py = y0 + h - 4 - ((y - lo) / span) * (h - 16);
        t === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
      });
      ctx.stroke();
    };
    ctx.strokeStyle = tr.label === "causal" ? COLORS[0] : "#999";
    line(tr.driven, false);
    ctx.strokeStyle = "#000";
    line(tr.still, true);
    ctx.setLineDash([]);
    ctx.fillStyle = "#333";
    ctx.fillText(`dim ${tr.index} (${tr.label})`, x0 + 6, y0 + 11);
  });
}

function drawBoundary(res) {
  const canvas = $("disc-canvas");
  const ctx = clear(canvas);
  const d = res.mask.length;
  const scores = res.min_adjusted_p.map((p) => -Math.log10(Math.max(p, 1e-300)));
  const top = Math.max(3, ...scores.map((s) => Math.min(s, 30)));
  const bw = (canvas.width - 40) / d;
  const base = canvas.height - 20;
  scores.forEach((s, i) => {
    const bh = (Math.min(s, 30) / top) * (base - 10);
    ctx.fillStyle = res.truth[i] ? COLORS[0] : "#bbb";
    ctx.fillRect(30 + i * bw, base - bh, Math.max(bw - 1, 1), bh);
    if (res.mask[i]) {
      ctx.fillStyle = "#d62728";
      ctx.fillRect(30 + i * bw, base + 3, Math.max(bw - 1, 1), 4);
    }
  });
  const cut = (-Math.log10(num("disc-alpha")) / top) * (base - 10);
  ctx.strokeStyle = "#d62728";
  ctx.beginPath();
  ctx.moveTo(30, base - cut);
  ctx.lineTo(canvas.width - 10, base - cut);
  ctx.stroke();
  ctx.fillStyle = "#333";
  ctx.fillText("-log10 adjusted p (blue: causal, red tick: selected)", 34, 12);
  $("disc-score").textContent =
    `precision ${res.precision.toFixed(3)}  recall ${res.recall.toFixed(3)}  F1 ${res.f1.toFixed(3)}`;
}

function drawPartial(rows) {
  const canvas = $("part-canvas");
  const ctx = clear(canvas);
  const alphas = [...new Set(rows.map((r) => r.alpha))];
  const mean = (a, f) => {
    const rs = rows.filter((r) => r.alpha === a);
    return rs.reduce((s, r) => s + f(r), 0) / rs.length;
  };
  const px = (a) => 40 + a * (canvas.width - 60);
  const py = (v) => canvas.height - 25 - v * (canvas.height - 45);
  [["partial recall", (r) => r.partial_recall, COLORS[0]], ["precision", (r) => r.score.precision, COLORS[1]]].forEach(
    ([name, f, color], k) => {
      ctx.strokeStyle = ctx.fillStyle = color;
      ctx.beginPath();
      alphas.forEach((a, i) => (i === 0 ? ctx.moveTo(px(a), py(mean(a, f))) : ctx.lineTo(px(a), py(mean(a, f)))));
      ctx.stroke();
      alphas.forEach((a) => ctx.fillRect(px(a) - 2, py(mean(a, f)) - 2, 4, 4));
      ctx.fillText(name, 50 + k * 110, 14);
    },
  );
  ctx.fillStyle = "#333";
  alphas.forEach((a) => ctx.fillText(String(a), px(a) - 6, canvas.height - 8));
}

function guarded(button, work) {
  $(button).addEventListener("click", () => {
    $(button).disabled = true;
    // Let the button repaint before the synchronous run.
    setTimeout(() => {
      try {
        work();
      } catch (e) {
        alert(e);
      } finally {
        $(button).disabled = false;
      }
    }, 10);
  });
}

await init();
for (const id of ["sim-env", "disc-env"]) {
  for (const name of presets().split(",")) {
    $(id).add(new Option(name, name, name === "point_mass_easy", name === "point_mass_easy"));
  }
}
guarded("sim-run", () =>
  drawSimulation(JSON.parse(simulate($("sim-env").value, num("sim-steps"), num("sim-seed"), 8))),
);
guarded("disc-run", () =>
  drawBoundary(JSON.parse(discover_boundary($("disc-env").value, num("disc-n"), num("disc-t"), num("disc-seed"), num("disc-alpha")))),
);
guarded("part-run", () => {
  const alphas = new Float64Array([0, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.7, 1.0]);
  drawPartial(JSON.parse(sweep_partial(alphas, num("part-seeds"), num("part-n"), num("part-t"))));
});
