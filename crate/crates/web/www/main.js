import init, { spell_trace, grid_weights, toy_sweep } from "./pkg/reviewcf_web.js";

const $ = (id) => document.getElementById(id);
const fmt = (x, d = 4) => (x === null || x === undefined ? "" : x.toFixed(d));

function unwrap(json) {
  const v = JSON.parse(json);
  if (v.error) throw new Error(v.error);
  return v.ok;
}

function fillBody(table, rows) {
  const body = table.tBodies[0];
  body.replaceChildren(...rows.map((cells) => {
    const tr = document.createElement("tr");
    for (const [text, cls] of cells) {
      const td = document.createElement("td");
      td.textContent = text;
      if (cls) td.className = cls;
      tr.append(td);
    }
    return tr;
  }));
}

function renderSpell() {
  const steps = unwrap(spell_trace($("spell-input").value));
  fillBody($("spell-table"), steps.map((s) => [
    [s.token], [s.squashed], [s.outcome, s.outcome], [s.result ?? "(dropped)"],
  ]));
}

let grid = [
  [1, 3, null, 4],
  [4, null, 2, 3],
  [null, 5, 5, 4],
  [5, 2, 5, null],
];
let target = [1, 1];

function buildGrid() {
  const t = $("grid");
  t.replaceChildren();
  const head = t.insertRow();
  head.insertCell().textContent = "";
  grid[0].forEach((_, i) => { head.insertCell().textContent = `Item${i + 1}`; });
  grid.forEach((row, u) => {
    const tr = t.insertRow();
    tr.insertCell().textContent = `User${u + 1}`;
    row.forEach((v, i) => {
      const td = tr.insertCell();
      const input = document.createElement("input");
      input.value = v ?? "";
      input.addEventListener("input", () => {
        const n = parseInt(input.value, 10);
        grid[u][i] = n >= 1 && n <= 5 ? n : null;
        renderWeights();
      });
      input.addEventListener("focus", () => {
        target = [u, i];
        $("grid").querySelectorAll("td.target").forEach((c) => c.classList.remove("target"));
        td.classList.add("target");
        renderWeights();
      });
      if (u === target[0] && i === target[1]) td.className = "target";
      td.append(input);
    });
  });
}

function renderWeights() {
  let view;
  try {
    view = unwrap(grid_weights(JSON.stringify(grid), target[0], target[1]));
  } catch (e) {
    $("prediction").textContent = e.message;
    return;
  }
  const p = view.target;
  $("prediction").textContent = p.fallback
    ? `User${p.user + 1} on Item${p.item + 1}: no usable neighbors, ${p.fallback} ${fmt(p.value, 3)}`
    : `User${p.user + 1} on Item${p.item + 1}: raw ${fmt(p.raw, 3)}, clamped ${fmt(p.value, 3)} from ${p.neighbors_used} neighbors`;
  const t = $("weights");
  t.replaceChildren();
  const head = t.insertRow();
  head.insertCell().textContent = "w (support)";
  view.weights.forEach((_, i) => { head.insertCell().textContent = `Item${i + 1}`; });
  view.weights.forEach((row, i) => {
    const tr = t.insertRow();
    tr.insertCell().textContent = `Item${i + 1}`;
    row.forEach((w, j) => {
      const td = tr.insertCell();
      if (w !== null) {
        td.textContent = `${fmt(w, 3)} (${view.support[i][j]})`;
        if (w < 0) td.className = "negative";
      }
    });
  });
}

function renderToy(ev) {
  ev?.preventDefault();
  const f = new FormData($("toy-form"));
  const num = (k) => Number(f.get(k));
  let rows;
  try {
    rows = unwrap(toy_sweep(num("seed"), num("users"), num("items"), num("density"), num("k")));
  } catch (e) {
    fillBody($("toy-table"), [[[e.message]]]);
    return;
  }
  const best = Math.min(...rows.map((r) => r.rmse));
  fillBody($("toy-table"), rows.map((r) => [
    [r.label], [fmt(r.rmse)], [fmt(r.fallback_rate, 3)], [fmt(r.mean_neighbors, 2)],
  ]));
  [...$("toy-table").tBodies[0].rows].forEach((tr, i) => {
    if (rows[i].rmse === best) tr.className = "best";
  });
}

await init();
$("spell-input").addEventListener("input", renderSpell);
$("toy-form").addEventListener("submit", renderToy);
renderSpell();
buildGrid();
renderWeights();
renderToy();
