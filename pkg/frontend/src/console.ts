// The console itself: a fixed-size monochrome chat terminal.
//
// Every reply line from the gateway becomes its own robot message, never
// merged; a dozed turn renders the configured doze message as a system
// message. Exactly one turn is in flight at a time: the input is disabled
// from submit until the response (or doze) lands.

import type { GatewayApi, GatewayConfig } from "./api.js";

export type Author = "user" | "robot" | "system";

export interface ConsoleOptions {
  // cosmetic line-by-line reveal; 0 keeps rendering synchronous for tests
  slowLineMs?: number;
}

const FALLBACK_ERROR = "(connection trouble. try again.)";

function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export class ChatConsole {
  private readonly slowLineMs: number;
  private config: GatewayConfig | null = null;
  private inFlight = false;

  private screenEl!: HTMLDivElement;
  private messagesEl!: HTMLDivElement;
  private formEl!: HTMLFormElement;
  private inputEl!: HTMLInputElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: GatewayApi,
    options: ConsoleOptions = {},
  ) {
    this.slowLineMs = options.slowLineMs ?? 0;
  }

  get busy(): boolean {
    return this.inFlight;
  }

  async boot(): Promise<void> {
    this.renderShell();
    try {
      this.config = await this.api.config();
    } catch {
      this.addMessage("system", "(the gateway is not answering)");
      return;
    }
    this.screenEl.style.width = `${this.config.screen.width}px`;
    this.screenEl.style.height = `${this.config.screen.height}px`;
    this.inputEl.maxLength = this.config.max_input_chars;
    try {
      for (const entry of await this.api.transcript()) {
        this.addMessage("user", entry.request.text, entry.response.turn_id);
        this.renderTurnSync(entry.response.lines, entry.response.dozed, entry.response.turn_id);
      }
    } catch {
      // a missing transcript only loses the replay, not the session
    }
    this.inputEl.focus();
  }

  private renderShell(): void {
    this.root.innerHTML = "";
    this.screenEl = document.createElement("div");
    this.screenEl.className = "screen";

    const title = document.createElement("div");
    title.className = "titlebar";
    const titleText = document.createElement("span");
    titleText.className = "title";
    titleText.textContent = "robot console";
    title.appendChild(titleText);

    this.messagesEl = document.createElement("div");
    this.messagesEl.className = "messages";

    this.formEl = document.createElement("form");
    this.formEl.className = "prompt";
    const label = document.createElement("span");
    label.className = "label";
    label.textContent = ">";
    this.inputEl = document.createElement("input");
    this.inputEl.type = "text"; // the prompt is single-line by construction
    this.inputEl.className = "entry";
    this.inputEl.autocomplete = "off";
    this.inputEl.spellcheck = false;
    const cursor = document.createElement("span");
    cursor.className = "cursor";
    this.formEl.append(label, this.inputEl, cursor);

    this.screenEl.append(title, this.messagesEl, this.formEl);
    this.root.appendChild(this.screenEl);

    this.inputEl.addEventListener("input", () => {
      this.inputEl.style.width = `${Math.max(1, this.inputEl.value.length)}ch`;
    });
    this.formEl.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
  }

  addMessage(author: Author, text: string, turnId?: number): HTMLDivElement {
    const el = document.createElement("div");
    el.className = `message ${author}`;
    el.textContent = text;
    if (turnId !== undefined) {
      el.dataset.turn = String(turnId);
    }
    this.messagesEl.appendChild(el);
    this.messagesEl.scrollTop = this.messagesEl.scrollHeight;
    return el;
  }

  private renderTurnSync(lines: string[], dozed: boolean, turnId: number): void {
    if (dozed) {
      this.addMessage("system", this.config?.doze_message ?? "Robot dozed off...", turnId);
      return;
    }
    for (const line of lines) {
      this.addMessage("robot", line, turnId);
    }
  }

  async submit(): Promise<void> {
    if (this.inFlight) {
      return;
    }
    const text = this.inputEl.value.trim();
    if (!text) {
      return;
    }
    this.inFlight = true;
    this.inputEl.disabled = true;
    this.formEl.classList.add("busy");
    const userEl = this.addMessage("user", text);
    try {
      const response = await this.api.turn(text);
      userEl.dataset.turn = String(response.turn_id);
      if (response.dozed) {
        this.addMessage("system", this.config?.doze_message ?? "Robot dozed off...", response.turn_id);
      } else {
        for (const line of response.lines) {
          if (this.slowLineMs > 0) {
            await delay(this.slowLineMs);
          }
          this.addMessage("robot", line, response.turn_id);
        }
      }
      this.inputEl.value = "";
      this.inputEl.style.width = "1ch";
    } catch (err) {
      const detail = err instanceof Error && err.message ? ` ${err.message}` : "";
      this.addMessage("system", `${FALLBACK_ERROR}${detail}`);
    } finally {
      this.inFlight = false;
      this.inputEl.disabled = false;
      this.formEl.classList.remove("busy");
      this.inputEl.focus();
    }
  }
}
