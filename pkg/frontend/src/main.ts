/** Browser entry point: a setup form, then the render loop for one session. */

import { CreateSessionRequest, Outcome, SessionApi } from "./api.js";
import { SessionController } from "./session.js";
import { render } from "./view.js";

function apiBase(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  return override ?? "";
}

function numberInput(form: HTMLFormElement, name: string): number {
  const raw = (form.elements.namedItem(name) as HTMLInputElement).value;
  return Number(raw);
}

function buildRequest(form: HTMLFormElement): CreateSessionRequest {
  const csvText = (form.elements.namedItem("csv") as HTMLTextAreaElement).value.trim();
  const delta = numberInput(form, "delta");
  const request: CreateSessionRequest = {
    dataset: csvText
      ? { csv_text: csvText }
      : {
          synthetic: {
            kind: "sphere",
            n: numberInput(form, "n"),
            d: numberInput(form, "d"),
            data_seed: numberInput(form, "data_seed"),
          },
        },
    config: {
      epsilon: numberInput(form, "epsilon"),
      delta,
      pool_size: numberInput(form, "pool_size"),
      seed: numberInput(form, "seed"),
    },
  };
  return request;
}

async function startSession(root: HTMLElement, request: CreateSessionRequest): Promise<void> {
  const api = new SessionApi(apiBase());
  root.textContent = "creating session";
  let controller: SessionController;
  try {
    controller = await SessionController.create(api, request);
  } catch (e) {
    root.textContent = "";
    const failure = document.createElement("div");
    failure.className = "banner error";
    failure.textContent = `could not create the session: ${String(e)}`;
    const back = document.createElement("button");
    back.textContent = "Back";
    back.addEventListener("click", () => window.location.reload());
    failure.appendChild(back);
    root.appendChild(failure);
    return;
  }
  const handlers = {
    choose: (outcome: Outcome) => void controller.submit(outcome),
    stop: () => void controller.stop(),
    retry: () => void controller.refresh(),
  };
  controller.subscribe((state) => render(root, state, handlers));
}

export function mount(root: HTMLElement): void {
  const form = root.querySelector("form");
  if (!(form instanceof HTMLFormElement)) {
    throw new Error("expected a setup form inside the mount root");
  }
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const request = buildRequest(form);
    const stage = document.getElementById("stage");
    if (stage instanceof HTMLElement) {
      form.hidden = true;
      void startSession(stage, request);
    }
  });
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  mount(document.getElementById("app") as HTMLElement);
}
