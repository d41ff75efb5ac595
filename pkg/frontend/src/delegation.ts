// Delegation initiation: pick a trust level, receive the session key id.
//
// Only the id ever reaches the browser; the backend proxies the signed
// creation request to Auth and Auth never returns key bytes on creation.

import { DelegationReceipt, WebsiteApi } from "./api.js";

export type DelegationView = {
  sessionKeyId: number;
  trust: string;
  createdAt: number;
  validitySummary: string;
};

export function summarizeValidity(receipt: DelegationReceipt): string {
  const relative = Math.round(receipt.relative_validity_seconds);
  const deadline = new Date(receipt.absolute_expiration * 1000).toISOString();
  return `${relative}s per session, unusable after ${deadline}`;
}

export function toView(trust: string, receipt: DelegationReceipt): DelegationView {
  return {
    sessionKeyId: receipt.session_key_id,
    trust,
    createdAt: receipt.created_at,
    validitySummary: summarizeValidity(receipt),
  };
}

export type DelegationHandle = {
  element: HTMLElement;
  /** Delegations created in this view, newest last. */
  created: DelegationView[];
  submit(): Promise<DelegationView>;
};

export function mountDelegationView(container: HTMLElement, api: WebsiteApi): DelegationHandle {
  const root = document.createElement("section");
  root.className = "delegation-view";
  root.innerHTML = `
    <form>
      <label>Trust level
        <select name="trust">
          <option value="High">High</option>
          <option value="Medium">Medium</option>
          <option value="Low">Low</option>
        </select>
      </label>
      <label>Purpose <input type="text" name="purpose" placeholder="optional"></label>
      <button type="submit">Create delegation</button>
      <span class="status" role="status"></span>
    </form>
    <ul class="delegation-list"></ul>
  `;
  container.appendChild(root);

  const form = root.querySelector("form")!;
  const trustSelect = root.querySelector<HTMLSelectElement>('select[name="trust"]')!;
  const purposeInput = root.querySelector<HTMLInputElement>('input[name="purpose"]')!;
  const status = root.querySelector<HTMLSpanElement>(".status")!;
  const list = root.querySelector<HTMLUListElement>(".delegation-list")!;
  const created: DelegationView[] = [];

  function render(view: DelegationView): void {
    const item = document.createElement("li");
    item.innerHTML = `
      session key id <code class="key-id">${view.sessionKeyId}</code>
      (${view.trust}; ${view.validitySummary})
      <button type="button" class="copy">copy id</button>
    `;
    item.querySelector<HTMLButtonElement>(".copy")!.addEventListener("click", () => {
      void navigator.clipboard?.writeText(String(view.sessionKeyId));
    });
    list.appendChild(item);
  }

  async function submit(): Promise<DelegationView> {
    status.textContent = "requesting...";
    try {
      const receipt = await api.createDelegation(trustSelect.value, purposeInput.value);
      const view = toView(trustSelect.value, receipt);
      created.push(view);
      render(view);
      status.textContent = `created id ${view.sessionKeyId}`;
      return view;
    } catch (err) {
      status.textContent = String(err);
      throw err;
    }
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void submit().catch(() => undefined);
  });

  return { element: root, created, submit };
}
