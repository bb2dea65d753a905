// Single-script embed entry point:
//
//   <div id="scholrec" data-repository-id="whiterose"
//        data-service-url="https://rec.example.org"></div>
//   <script src="widget.js"></script>

export { ApiClient } from "./api";
export { extractPageMetadata } from "./metadata";
export { renderDisabledPanel, renderPanel } from "./panel";
export { userToken } from "./token";
export { autoMount, mountWidget, readEmbedConfig, DEFAULT_CONTAINER_ID } from "./widget";
export type * from "./types";

import { autoMount } from "./widget";

if (typeof document !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", () => void autoMount(document));
  } else {
    void autoMount(document);
  }
}
