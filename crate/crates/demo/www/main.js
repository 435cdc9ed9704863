import init, { canonicalize, hed_svg, check_programs } from "./pkg/hedcheck_demo.js";

const $ = (id) => document.getElementById(id);

// Empty or invalid fields mean "not set".
function optionalInt(id) {
  const v = parseInt($(id).value, 10);
  return Number.isFinite(v) ? v : undefined;
}

function show(el, text, isError) {
  el.textContent = text;
  el.className = isError ? "error" : "";
}

function run(action, errorTarget) {
  try {
    action();
  } catch (e) {
    show(errorTarget, String(e.message ?? e), true);
  }
}

await init();

$("canon").addEventListener("click", () =>
  run(() => show($("canon-out"), canonicalize($("program").value, optionalInt("canon-width"))), $("canon-out")));

$("draw").addEventListener("click", () =>
  run(() => {
    $("diagram").innerHTML = hed_svg($("program").value, optionalInt("canon-width"));
    show($("canon-out"), "");
  }, $("canon-out")));

$("check").addEventListener("click", () =>
  run(() => {
    const json = check_programs($("spec").value, $("impl").value, optionalInt("check-width"), optionalInt("check-nodes"));
    const report = JSON.parse(json);
    $("verdict").textContent = report.verdict;
    $("verdict").className = report.verdict;
    show($("report"), JSON.stringify(report, null, 2));
  }, $("report")));
