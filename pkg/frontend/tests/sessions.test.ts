// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import type { SessionRow, WebsiteApi } from "../src/api.js";
import {
  countdownSeconds,
  formatCountdown,
  mountSessionsView,
  sessionStatus,
} from "../src/sessions.js";

const row = (expiresAt: number, active = true): SessionRow => ({
  agent: "Business",
  agent_group: "HighTrustAgents",
  started_at: expiresAt - 60,
  expires_at: expiresAt,
  active,
});

describe("countdown math", () => {
  it("counts down to zero and never below", () => {
    expect(countdownSeconds(100, 40_000)).toBe(60);
    expect(countdownSeconds(100, 100_000)).toBe(0);
    expect(countdownSeconds(100, 160_000)).toBe(0);
  });

  it("status flips exactly at expiry", () => {
    expect(sessionStatus(row(100), 99_999)).toBe("active");
    expect(sessionStatus(row(100), 100_000)).toBe("terminated");
  });

  it("inactive rows render terminated regardless of clock", () => {
    expect(sessionStatus(row(1_000_000, false), 0)).toBe("terminated");
  });

  it("formats remaining seconds", () => {
    expect(formatCountdown(row(100), 70_000)).toBe("30s left");
    expect(formatCountdown(row(100), 100_000)).toBe("terminated");
  });
});

describe("sessions view", () => {
  it("rows flip to terminated when the countdown lapses", async () => {
    let nowMs = 90_000;
    const api = {
      listSessions: async () => [row(100)],
      listPurchases: async () => [],
      listAudit: async () => [],
    } as unknown as WebsiteApi;

    const container = document.createElement("div");
    document.body.appendChild(container);
    const view = mountSessionsView(container, api, { now: () => nowMs });
    await view.refresh();

    const statusCell = () =>
      container.querySelector<HTMLTableCellElement>(".session-status")!.textContent;
    expect(statusCell()).toBe("10s left");

    nowMs = 100_000; // countdown reaches zero between polls
    view.renderCountdowns();
    expect(statusCell()).toBe("terminated");
  });

  it("shows a banner when the backend is unreachable", async () => {
    const api = {
      listSessions: async () => {
        throw new Error("connection refused");
      },
      listPurchases: async () => [],
      listAudit: async () => [],
    } as unknown as WebsiteApi;

    const container = document.createElement("div");
    document.body.appendChild(container);
    const view = mountSessionsView(container, api);
    await view.refresh();
    const banner = container.querySelector<HTMLParagraphElement>(".banner")!;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("backend unreachable");
  });
});
