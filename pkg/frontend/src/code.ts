// Plugin entry: a URL panel that hands the spec URL to the importer.

import { ImportError, importSpec } from "./importer";

figma.showUI(__html__, { width: 340, height: 150 });

figma.ui.onmessage = async (msg: { type?: string; url?: string }) => {
  if (msg.type === "cancel") {
    figma.closePlugin();
    return;
  }
  if (msg.type !== "import" || typeof msg.url !== "string" || !msg.url) {
    return;
  }
  try {
    const report = await importSpec(msg.url, { figma, fetchFn: fetch });
    for (const warning of report.warnings) console.warn(warning);
    const suffix =
      report.warnings.length > 0
        ? ` (${report.warnings.length} downgrade warning${
            report.warnings.length === 1 ? "" : "s"
          }, see console)`
        : "";
    figma.notify(`Imported ${report.nodesCreated} nodes${suffix}`);
    figma.ui.postMessage({ type: "done", report });
  } catch (err) {
    const message =
      err instanceof ImportError ? err.message : `import failed: ${err}`;
    figma.notify(message, { error: true });
    figma.ui.postMessage({ type: "error", message });
  }
};
