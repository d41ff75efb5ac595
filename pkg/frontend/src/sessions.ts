// Live session table with countdowns, plus purchase and audit listings.
//
// Countdowns are computed client-side from expires_at; rows flip to
// "terminated" the moment the countdown reaches zero, between polls.

import { AuditRow, PurchaseRow, SessionRow, WebsiteApi } from "./api.js";

export const DEFAULT_POLL_MS = 2000;

export function countdownSeconds(expiresAtSec: number, nowMs: number): number {
  return Math.max(0, expiresAtSec - nowMs / 1000);
}

export function sessionStatus(row: SessionRow, nowMs: number): "active" | "terminated" {
  return nowMs / 1000 >= row.expires_at || !row.active ? "terminated" : "active";
}

export function formatCountdown(row: SessionRow, nowMs: number): string {
  const status = sessionStatus(row, nowMs);
  return status === "terminated" ? "terminated" : `${countdownSeconds(row.expires_at, nowMs).toFixed(0)}s left`;
}

export type SessionsHandle = {
  element: HTMLElement;
  refresh(): Promise<void>;
  renderCountdowns(): void;
  start(): void;
  stop(): void;
};

type Options = {
  pollMs?: number;
  now?: () => number;
};

export function mountSessionsView(
  container: HTMLElement,
  api: WebsiteApi,
  options: Options = {},
): SessionsHandle {
  const pollMs = options.pollMs ?? DEFAULT_POLL_MS;
  const now = options.now ?? (() => Date.now());

  const root = document.createElement("section");
  root.className = "sessions-view";
  root.innerHTML = `
    <h3>Agent sessions</h3>
    <table class="sessions">
      <thead><tr><th>Agent</th><th>Group</th><th>Started</th><th>Expires</th><th>Status</th></tr></thead>
      <tbody></tbody>
    </table>
    <h3>Simulated purchases</h3>
    <ul class="purchases"></ul>
    <h3>Audit log</h3>
    <ul class="audit"></ul>
    <p class="banner" hidden></p>
  `;
  container.appendChild(root);

  const sessionsBody = root.querySelector<HTMLTableSectionElement>("table.sessions tbody")!;
  const purchasesList = root.querySelector<HTMLUListElement>(".purchases")!;
  const auditList = root.querySelector<HTMLUListElement>(".audit")!;
  const banner = root.querySelector<HTMLParagraphElement>(".banner")!;

  let rows: SessionRow[] = [];
  let timer: ReturnType<typeof setInterval> | null = null;

  function renderSessions(): void {
    sessionsBody.replaceChildren();
    for (const row of rows) {
      const tr = document.createElement("tr");
      const started = new Date(row.started_at * 1000).toISOString();
      const expires = new Date(row.expires_at * 1000).toISOString();
      tr.innerHTML = `
        <td>${row.agent}</td><td>${row.agent_group}</td>
        <td>${started}</td><td>${expires}</td>
        <td class="session-status">${formatCountdown(row, now())}</td>
      `;
      sessionsBody.appendChild(tr);
    }
  }

  function renderPurchases(purchases: PurchaseRow[]): void {
    purchasesList.replaceChildren();
    for (const p of purchases) {
      const li = document.createElement("li");
      li.textContent = `#${p.id} ${p.item} -> ${p.shipping_address} (${p.status})`;
      purchasesList.appendChild(li);
    }
  }

  function renderAudit(events: AuditRow[]): void {
    auditList.replaceChildren();
    for (const e of events.slice(-50)) {
      const li = document.createElement("li");
      const at = new Date(e.at * 1000).toISOString();
      const extras = Object.entries(e)
        .filter(([k]) => k !== "at" && k !== "event")
        .map(([k, v]) => `${k}=${String(v)}`)
        .join(" ");
      li.textContent = `${at} ${e.event} ${extras}`.trim();
      auditList.appendChild(li);
    }
  }

  async function refresh(): Promise<void> {
    try {
      const [sessions, purchases, audit] = await Promise.all([
        api.listSessions(),
        api.listPurchases(),
        api.listAudit(),
      ]);
      rows = sessions;
      banner.hidden = true;
      renderSessions();
      renderPurchases(purchases);
      renderAudit(audit);
    } catch (err) {
      banner.hidden = false;
      banner.textContent = `backend unreachable: ${String(err)}`;
    }
  }

  function renderCountdowns(): void {
    renderSessions();
  }

  function start(): void {
    if (timer === null) {
      timer = setInterval(() => void refresh(), pollMs);
    }
  }

  function stop(): void {
    if (timer !== null) {
      clearInterval(timer);
      timer = null;
    }
  }

  return { element: root, refresh, renderCountdowns, start, stop };
}
