import { JudgeApi } from "./api.js";
import { initApp } from "./app.js";

/**
 * Standalone boot: the page is opened with ?server=...&token=... (or has
 * them stored from a previous visit). Without both, show a small form.
 */

function storedConfig(): { server: string; token: string } | null {
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server") ?? sessionStorage.getItem("judge-server");
  const token = params.get("token") ?? sessionStorage.getItem("judge-token");
  if (server && token) {
    sessionStorage.setItem("judge-server", server);
    sessionStorage.setItem("judge-token", token);
    return { server, token };
  }
  return null;
}

function renderConnectForm(root: HTMLElement): void {
  root.textContent = "";
  const form = document.createElement("form");
  form.className = "connect-form";

  const serverInput = document.createElement("input");
  serverInput.placeholder = "server, e.g. http://127.0.0.1:8000";
  serverInput.value = "http://127.0.0.1:8000";
  const tokenInput = document.createElement("input");
  tokenInput.placeholder = "your access token";
  const go = document.createElement("button");
  go.type = "submit";
  go.textContent = "start judging";

  form.appendChild(serverInput);
  form.appendChild(tokenInput);
  form.appendChild(go);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    sessionStorage.setItem("judge-server", serverInput.value.trim());
    sessionStorage.setItem("judge-token", tokenInput.value.trim());
    window.location.search = "";
  });
  root.appendChild(form);
}

const root = document.getElementById("app");
if (root) {
  const config = storedConfig();
  if (!config) {
    renderConnectForm(root);
  } else {
    const api = new JudgeApi(config.server, config.token);
    initApp(root, api).catch((error: Error) => {
      root.textContent = `could not load your assignment: ${error.message}`;
    });
  }
}
