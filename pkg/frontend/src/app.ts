// Single-page console wiring: credential bar, tabs, and the three views.

import { WebsiteApi } from "./api.js";
import { mountDelegationView } from "./delegation.js";
import { mountScopeForm } from "./scopeForm.js";
import { mountSessionsView } from "./sessions.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

export function bootstrap(): void {
  const api = new WebsiteApi("");

  const loginForm = byId<HTMLFormElement>("login-form");
  const loginStatus = byId<HTMLSpanElement>("login-status");
  const views = byId<HTMLDivElement>("views");

  const scope = mountScopeForm(byId("scope-view"), api);
  const delegation = mountDelegationView(byId("delegation-view"), api);
  const sessions = mountSessionsView(byId("sessions-view"), api);
  void delegation; // handles kept alive by the DOM

  loginForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(loginForm);
    api.setCredentials({
      username: String(data.get("username") ?? ""),
      password: String(data.get("password") ?? ""),
    });
    api
      .getScopes()
      .then(() => {
        loginStatus.textContent = "connected";
        views.hidden = false;
        sessions.start();
        return Promise.all([scope.refresh(), sessions.refresh()]);
      })
      .catch((err) => {
        api.setCredentials(null);
        views.hidden = true;
        sessions.stop();
        loginStatus.textContent = `login failed: ${String(err)}`;
      });
  });

  for (const tab of document.querySelectorAll<HTMLButtonElement>("nav button[data-view]")) {
    tab.addEventListener("click", () => {
      for (const section of views.querySelectorAll<HTMLElement>("section.view")) {
        section.hidden = section.id !== tab.dataset.view;
      }
    });
  }

  // countdowns tick faster than the poll interval
  setInterval(() => sessions.renderCountdowns(), 500);
}

bootstrap();
