/** Preview recording for the correction loop.
 *
 * Frames are rasterized from the preview document via an SVG foreignObject
 * snapshot onto a canvas stream, then recorded with MediaRecorder. Browsers
 * emit WebM; the upload endpoint stores whatever bytes it gets under the
 * node's video slot, and transcoding to real MP4 is deliberately outside the
 * engine (a headless renderer can replace this provider wholesale).
 * Environments without MediaRecorder (tests) get a tiny placeholder blob so
 * the upload-and-correct flow stays exercisable.
 */

export interface CaptureOptions {
  durationSeconds: number;
  fps?: number;
  width?: number;
  height?: number;
}

function frameSnapshotUrl(frame: HTMLIFrameElement, width: number, height: number): string {
  const doc = frame.contentDocument;
  const markup = doc ? doc.documentElement.outerHTML : "<html></html>";
  const svg =
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}">` +
    `<foreignObject width="100%" height="100%">` +
    `<div xmlns="http://www.w3.org/1999/xhtml">${markup}</div>` +
    `</foreignObject></svg>`;
  return `data:image/svg+xml;charset=utf-8,${encodeURIComponent(svg)}`;
}

export function captureSupported(): boolean {
  return (
    typeof MediaRecorder !== "undefined" &&
    typeof HTMLCanvasElement !== "undefined" &&
    "captureStream" in HTMLCanvasElement.prototype
  );
}

export async function capturePreview(
  frame: HTMLIFrameElement,
  options: CaptureOptions,
): Promise<Blob> {
  if (!captureSupported()) {
    // Placeholder payload; keeps the correction flow drivable headless.
    return new Blob([`capture-stub:${options.durationSeconds}s`], { type: "video/mp4" });
  }
  const width = options.width ?? 640;
  const height = options.height ?? 480;
  const fps = options.fps ?? 15;
  const canvas = document.createElement("canvas");
  canvas.width = width;
  canvas.height = height;
  const context = canvas.getContext("2d")!;
  const stream = canvas.captureStream(fps);
  const recorder = new MediaRecorder(stream);
  const chunks: BlobPart[] = [];
  recorder.ondataavailable = (event) => {
    if (event.data.size > 0) chunks.push(event.data);
  };

  const drawFrame = () =>
    new Promise<void>((resolve) => {
      const image = new Image();
      image.onload = () => {
        context.fillStyle = "#ffffff";
        context.fillRect(0, 0, width, height);
        context.drawImage(image, 0, 0, width, height);
        resolve();
      };
      image.onerror = () => resolve();
      image.src = frameSnapshotUrl(frame, width, height);
    });

  recorder.start();
  const interval = setInterval(drawFrame, 1000 / fps);
  await new Promise((resolve) => setTimeout(resolve, options.durationSeconds * 1000));
  clearInterval(interval);
  recorder.stop();
  await new Promise<void>((resolve) => {
    recorder.onstop = () => resolve();
  });
  return new Blob(chunks, { type: recorder.mimeType || "video/webm" });
}
