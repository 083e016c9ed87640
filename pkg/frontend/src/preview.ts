import type { Bundle } from "./types.js";

/** Assembles a bundle into one self-contained document for the sandboxed
 * preview frame. Runtime errors are caught inside the frame and posted to the
 * parent so they can be shown as an overlay instead of crashing the panel. */
export function buildPreviewDocument(bundle: Bundle | null): string {
  if (!bundle) {
    return "<!doctype html><html><body></body></html>";
  }
  const script = bundle.script.trim()
    ? `<script>
try {
${bundle.script}
} catch (err) {
  parent.postMessage({ type: "preview-error", message: String(err) }, "*");
}
</script>`
    : "";
  return `<!doctype html>
<html>
<head>
<meta charset="utf-8">
<style>
html, body { margin: 0; padding: 16px; height: 100%; box-sizing: border-box; }
body { display: grid; place-items: center; background: #fff; }
${bundle.style}
</style>
</head>
<body>
${bundle.template}
<script>
window.addEventListener("error", (event) => {
  parent.postMessage({ type: "preview-error", message: String(event.message) }, "*");
});
</script>
${script}
</body>
</html>`;
}
