import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";

function boot(): void {
  const controller = new Controller(document, new ApiClient(""));
  controller.init();
}

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", boot);
} else {
  boot();
}
