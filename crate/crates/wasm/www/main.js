import init, { colorTable, detectColors, detectShapes, matchObjects, sampleImage } from "./pkg/objdetect_wasm.js";

const $ = (id) => document.getElementById(id);
const SHAPES = ["Circle", "Triangle", "Square", "Rectangle", "Other"];
const inputs = { color: null, shape: null, object: null, scene: null };

function showError(e) {
  $("error").textContent = e ? String(e.message ?? e) : "";
}

async function fileToPixels(file) {
  const bitmap = await createImageBitmap(file);
  const canvas = new OffscreenCanvas(bitmap.width, bitmap.height);
  const ctx = canvas.getContext("2d");
  ctx.drawImage(bitmap, 0, 0);
  const data = ctx.getImageData(0, 0, bitmap.width, bitmap.height);
  return { rgba: new Uint8Array(data.data.buffer), width: data.width, height: data.height };
}

function sample(name) {
  const s = sampleImage(name);
  return { rgba: s.rgba, width: s.width, height: s.height };
}

function draw(canvasId, rgba, width, height) {
  const canvas = $(canvasId);
  canvas.width = width;
  canvas.height = height;
  const img = new ImageData(new Uint8ClampedArray(rgba), width, height);
  canvas.getContext("2d").putImageData(img, 0, 0);
}

function checkboxes(containerId, items, checked) {
  const box = $(containerId);
  box.replaceChildren();
  for (const item of items) {
    const label = document.createElement("label");
    const input = document.createElement("input");
    input.type = "checkbox";
    input.value = item.name;
    input.checked = checked.includes(item.name);
    label.append(input);
    if (item.highlight) {
      const sw = document.createElement("span");
      sw.className = "swatch";
      sw.style.background = `rgb(${item.highlight.join(",")})`;
      label.append(" ", sw);
    }
    label.append(" ", item.name);
    box.append(label);
  }
}

function selected(containerId) {
  return [...$(containerId).querySelectorAll("input:checked")].map((i) => i.value).join(",");
}

function show(prefix, outcome) {
  draw(`${prefix}-out`, outcome.rgba, outcome.width, outcome.height);
  $(`${prefix}-json`).textContent = outcome.report;
  return JSON.parse(outcome.report);
}

function runColor() {
  const img = inputs.color;
  if (!img) throw new Error("load an image first");
  const doc = show("color", detectColors(img.rgba, img.width, img.height, selected("color-list"), ""));
  $("color-summary").textContent = doc.colors.map((c) => `${c.name}: ${c.region_count} region(s), ${c.pixel_count} px`).join("; ");
}

function runShape() {
  const img = inputs.shape;
  if (!img) throw new Error("load an image first");
  const doc = show("shape", detectShapes(img.rgba, img.width, img.height, selected("shape-list"), ""));
  const counts = {};
  for (const d of doc.detections) counts[d.label] = (counts[d.label] ?? 0) + 1;
  $("shape-summary").textContent = Object.entries(counts).map(([k, v]) => `${k}: ${v}`).join("; ") || "no shapes found";
}

function runMatch() {
  const { object, scene } = inputs;
  if (!object || !scene) throw new Error("load an object and a scene first");
  const out = matchObjects(object.rgba, object.width, object.height, scene.rgba, scene.width, scene.height, "");
  const doc = show("match", out);
  const banner = $("match-banner");
  banner.style.display = doc.found ? "none" : "block";
  banner.textContent = doc.found ? "" : `Object not found: ${doc.reason}`;
  const c = doc.counts;
  $("match-summary").textContent =
    `${c.object_keypoints} / ${c.scene_keypoints} keypoints, ${c.good_matches} good matches, ${c.inliers} inliers`;
}

function guard(fn) {
  return async (...args) => {
    try {
      showError(null);
      await fn(...args);
    } catch (e) {
      showError(e);
    }
  };
}

async function main() {
  await init();
  const colors = JSON.parse(colorTable());
  checkboxes("color-list", colors, ["Green", "Pink"]);
  checkboxes("shape-list", SHAPES.map((name) => ({ name })), SHAPES.slice(0, 4));

  for (const button of document.querySelectorAll("nav button")) {
    button.addEventListener("click", () => {
      for (const b of document.querySelectorAll("nav button")) b.classList.toggle("active", b === button);
      for (const s of document.querySelectorAll("section")) s.classList.toggle("active", s.id === button.dataset.mode);
    });
  }

  const preview = (key, canvasId) => {
    const img = inputs[key];
    draw(canvasId, img.rgba, img.width, img.height);
  };
  $("color-file").addEventListener("change", guard(async (e) => { inputs.color = await fileToPixels(e.target.files[0]); preview("color", "color-out"); }));
  $("shape-file").addEventListener("change", guard(async (e) => { inputs.shape = await fileToPixels(e.target.files[0]); preview("shape", "shape-out"); }));
  $("match-object").addEventListener("change", guard(async (e) => { inputs.object = await fileToPixels(e.target.files[0]); }));
  $("match-scene").addEventListener("change", guard(async (e) => { inputs.scene = await fileToPixels(e.target.files[0]); preview("scene", "match-out"); }));

  $("color-sample").addEventListener("click", guard(() => { inputs.color = sample("swatches"); preview("color", "color-out"); }));
  $("shape-sample").addEventListener("click", guard(() => { inputs.shape = sample("shapes"); preview("shape", "shape-out"); }));
  $("match-sample").addEventListener("click", guard(() => {
    inputs.object = sample("object");
    inputs.scene = sample("scene");
    preview("scene", "match-out");
  }));

  $("color-run").addEventListener("click", guard(runColor));
  $("shape-run").addEventListener("click", guard(runShape));
  $("match-run").addEventListener("click", guard(runMatch));
}

main().catch(showError);
