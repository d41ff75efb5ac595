// Scope editor: per-agent-group field checkboxes plus the purchase toggle.
//
// The form mirrors the backend invariant client-side: the purchase toggle
// is disabled (and cleared) unless address, card, and phone are all
// checked, so every state the form can submit is accepted by the backend.

import { ScopeConfig, WebsiteApi } from "./api.js";

export const PROFILE_FIELDS = ["email", "phone", "address", "card"] as const;
export type ProfileField = (typeof PROFILE_FIELDS)[number];

export const AGENT_GROUPS = ["HighTrustAgents", "MediumTrustAgents", "LowTrustAgents"];

const PURCHASE_REQUIRES: ProfileField[] = ["address", "card", "phone"];

export type ScopeFormState = {
  agentGroup: string;
  fields: Record<ProfileField, boolean>;
  mayPurchase: boolean;
};

export function emptyState(agentGroup = "LowTrustAgents"): ScopeFormState {
  return {
    agentGroup,
    fields: { email: false, phone: false, address: false, card: false },
    mayPurchase: false,
  };
}

export function purchaseRequirementsMet(state: ScopeFormState): boolean {
  return PURCHASE_REQUIRES.every((field) => state.fields[field]);
}

/** Returns a validation error message, or null when submittable. */
export function validate(state: ScopeFormState): string | null {
  if (!AGENT_GROUPS.includes(state.agentGroup)) {
    return `unknown agent group: ${state.agentGroup}`;
  }
  if (state.mayPurchase && !purchaseRequirementsMet(state)) {
    return "purchases need address, card, and phone access";
  }
  return null;
}

/** Clears the purchase toggle when its prerequisites are unchecked. */
export function normalize(state: ScopeFormState): ScopeFormState {
  if (state.mayPurchase && !purchaseRequirementsMet(state)) {
    return { ...state, mayPurchase: false };
  }
  return state;
}

export function toRequestBody(state: ScopeFormState): ScopeConfig {
  return {
    allowed_fields: PROFILE_FIELDS.filter((field) => state.fields[field]),
    may_purchase: state.mayPurchase,
  };
}

export function fromScopeConfig(agentGroup: string, config: ScopeConfig): ScopeFormState {
  const state = emptyState(agentGroup);
  for (const field of PROFILE_FIELDS) {
    state.fields[field] = config.allowed_fields.includes(field);
  }
  state.mayPurchase = config.may_purchase;
  return state;
}

export type ScopeFormHandle = {
  element: HTMLElement;
  /** Current form state as read from the DOM. */
  readState(): ScopeFormState;
  /** Load the backend's stored scopes into the form. */
  refresh(): Promise<void>;
  /** Submit the current state; resolves once saved. */
  submit(): Promise<void>;
};

export function mountScopeForm(container: HTMLElement, api: WebsiteApi): ScopeFormHandle {
  const root = document.createElement("form");
  root.className = "scope-form";
  root.innerHTML = `
    <label>Agent group
      <select name="agent-group">
        ${AGENT_GROUPS.map((g) => `<option value="${g}">${g}</option>`).join("")}
      </select>
    </label>
    <fieldset class="scope-fields">
      <legend>Accessible profile fields</legend>
      ${PROFILE_FIELDS.map(
        (f) => `<label><input type="checkbox" name="field-${f}"> ${f}</label>`,
      ).join("")}
    </fieldset>
    <label class="purchase-toggle">
      <input type="checkbox" name="may-purchase" disabled>
      allow simulated purchases (needs address, card, phone)
    </label>
    <button type="submit">Save scope</button>
    <span class="status" role="status"></span>
  `;
  container.appendChild(root);

  const select = root.querySelector<HTMLSelectElement>('select[name="agent-group"]')!;
  const purchaseBox = root.querySelector<HTMLInputElement>('input[name="may-purchase"]')!;
  const status = root.querySelector<HTMLSpanElement>(".status")!;
  const fieldBox = (field: ProfileField) =>
    root.querySelector<HTMLInputElement>(`input[name="field-${field}"]`)!;

  function readState(): ScopeFormState {
    return {
      agentGroup: select.value,
      fields: {
        email: fieldBox("email").checked,
        phone: fieldBox("phone").checked,
        address: fieldBox("address").checked,
        card: fieldBox("card").checked,
      },
      mayPurchase: purchaseBox.checked,
    };
  }

  function syncPurchaseToggle(): void {
    const allowed = purchaseRequirementsMet(readState());
    purchaseBox.disabled = !allowed;
    if (!allowed) {
      purchaseBox.checked = false;
    }
  }

  function writeState(state: ScopeFormState): void {
    select.value = state.agentGroup;
    for (const field of PROFILE_FIELDS) {
      fieldBox(field).checked = state.fields[field];
    }
    purchaseBox.checked = state.mayPurchase;
    syncPurchaseToggle();
  }

  for (const field of PROFILE_FIELDS) {
    fieldBox(field).addEventListener("change", syncPurchaseToggle);
  }

  async function refresh(): Promise<void> {
    const scopes = await api.getScopes();
    const config = scopes[select.value];
    if (config) {
      writeState(fromScopeConfig(select.value, config));
    }
  }

  select.addEventListener("change", () => {
    refresh().catch((err) => {
      status.textContent = String(err);
    });
  });

  async function submit(): Promise<void> {
    const state = normalize(readState());
    const problem = validate(state);
    if (problem !== null) {
      status.textContent = problem;
      throw new Error(problem); // blocked client-side, never submitted
    }
    status.textContent = "saving...";
    try {
      await api.putScope(state.agentGroup, toRequestBody(state));
      status.textContent = "saved";
    } catch (err) {
      status.textContent = String(err);
      throw err;
    }
  }

  root.addEventListener("submit", (event) => {
    event.preventDefault();
    void submit().catch(() => undefined);
  });

  return { element: root, readState, refresh, submit };
}
