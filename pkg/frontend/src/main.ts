import { AnnotationClient } from "./api.js";
import { AnnotatorApp } from "./app.js";

/** Entry point: service base URL and annotator id come from the query
 * string, e.g. index.html?service=http://127.0.0.1:8000&annotator=ann0 */
export function bootstrap(win: Window): AnnotatorApp {
  const params = new URLSearchParams(win.location.search);
  const service = params.get("service") ?? "http://127.0.0.1:8000";
  const annotator = params.get("annotator");
  const root = win.document.getElementById("app");
  if (!root) {
    throw new Error("missing #app element");
  }
  if (!annotator) {
    root.textContent = "Missing ?annotator=<id> query parameter.";
    throw new Error("missing annotator id");
  }
  const app = new AnnotatorApp(
    root,
    new AnnotationClient(service.replace(/\/$/, "")),
    annotator,
  );
  void app.start();
  return app;
}

declare const window: Window | undefined;
if (typeof window !== "undefined" && window.document?.getElementById("app")) {
  bootstrap(window);
}
