// Typed client for the website backend's human endpoints.
//
// Every response body passes through an optional inspector hook before
// parsing so tests can assert that no key material ever reaches the UI.

export type ScopeConfig = {
  allowed_fields: string[];
  may_purchase: boolean;
};

export type ScopeMap = Record<string, ScopeConfig>;

export type DelegationReceipt = {
  session_key_id: number;
  expected_owner_groups: string[];
  relative_validity_seconds: number;
  absolute_expiration: number;
  created_at: number;
};

export type SessionRow = {
  agent: string;
  agent_group: string;
  started_at: number;
  expires_at: number;
  active: boolean;
};

export type PurchaseRow = {
  id: number;
  item: string;
  shipping_address: string;
  card: string;
  phone: string;
  placed_at: number;
  status: string;
};

export type AuditRow = {
  at: number;
  event: string;
  [key: string]: unknown;
};

export type Credentials = { username: string; password: string };

export type PayloadInspector = (path: string, rawBody: string) => void;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
  ) {
    super(`${status} ${code}: ${detail}`);
  }
}

/** Heuristic for leaked secrets: hex runs long enough to be key material.
 * Session keys and distribution keys are 32 bytes (64 hex chars); nothing
 * legitimate in a UI payload is a hex run of 48+ chars. */
export function looksLikeKeyMaterial(text: string): boolean {
  return /[0-9a-f]{48,}/i.test(text);
}

/** Property names that must never appear in a UI-bound response. */
const FORBIDDEN_KEYS = new Set(["key", "distribution_key", "key_hex", "session_token"]);

export function forbiddenKeyPaths(doc: unknown, prefix = ""): string[] {
  if (Array.isArray(doc)) {
    return doc.flatMap((item, i) => forbiddenKeyPaths(item, `${prefix}[${i}]`));
  }
  if (doc !== null && typeof doc === "object") {
    return Object.entries(doc as Record<string, unknown>).flatMap(([name, value]) => {
      const path = prefix ? `${prefix}.${name}` : name;
      const here = FORBIDDEN_KEYS.has(name) ? [path] : [];
      return here.concat(forbiddenKeyPaths(value, path));
    });
  }
  return [];
}

export class WebsiteApi {
  private credentials: Credentials | null;

  constructor(
    private readonly baseUrl: string,
    credentials: Credentials | null = null,
    private readonly inspector: PayloadInspector | null = null,
    private readonly fetchImpl: typeof fetch = globalThis.fetch,
  ) {
    this.credentials = credentials;
  }

  setCredentials(credentials: Credentials | null): void {
    this.credentials = credentials;
  }

  hasCredentials(): boolean {
    return this.credentials !== null;
  }

  async getScopes(): Promise<ScopeMap> {
    return this.request<ScopeMap>("GET", "/api/scopes");
  }

  async putScope(agentGroup: string, config: ScopeConfig): Promise<void> {
    await this.request<void>("PUT", `/api/scopes/${encodeURIComponent(agentGroup)}`, config);
  }

  async createDelegation(trust: string, purpose = ""): Promise<DelegationReceipt> {
    return this.request<DelegationReceipt>("POST", "/api/delegations", { trust, purpose });
  }

  async listSessions(): Promise<SessionRow[]> {
    return this.request<SessionRow[]>("GET", "/api/sessions");
  }

  async listPurchases(): Promise<PurchaseRow[]> {
    return this.request<PurchaseRow[]>("GET", "/api/purchases");
  }

  async listAudit(): Promise<AuditRow[]> {
    return this.request<AuditRow[]>("GET", "/api/audit");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.credentials) {
      const token = btoa(`${this.credentials.username}:${this.credentials.password}`);
      headers["Authorization"] = `Basic ${token}`;
    }
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const raw = await response.text();
    if (this.inspector) {
      this.inspector(path, raw);
    }
    if (!response.ok) {
      let code = "error";
      let detail = raw;
      try {
        const parsed = JSON.parse(raw) as { error?: string; detail?: string };
        code = parsed.error ?? code;
        detail = parsed.detail ?? detail;
      } catch {
        // non-JSON error body; keep raw text
      }
      throw new ApiError(response.status, code, detail);
    }
    return (raw ? JSON.parse(raw) : undefined) as T;
  }
}
