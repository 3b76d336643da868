import type {
  GatewayApi,
  GatewayConfig,
  TranscriptEntry,
  TurnResponse,
} from "../src/api.js";
import { ChatConsole } from "../src/console.js";

export const TEST_CONFIG: GatewayConfig = {
  doze_message: "Robot dozed off...",
  max_input_chars: 253,
  max_line_bytes: 253,
  screen: { width: 640, height: 480, monochrome: true },
};

export class FakeApi implements GatewayApi {
  turns: TurnResponse[] = [];
  transcriptEntries: TranscriptEntry[] = [];
  turnCalls: string[] = [];
  nextTurn: (() => Promise<TurnResponse>) | null = null;
  private served = 0;

  constructor(readonly cfg: GatewayConfig = TEST_CONFIG) {}

  async config(): Promise<GatewayConfig> {
    return this.cfg;
  }

  async transcript(): Promise<TranscriptEntry[]> {
    return this.transcriptEntries;
  }

  async turn(text: string): Promise<TurnResponse> {
    this.turnCalls.push(text);
    if (this.nextTurn) {
      return this.nextTurn();
    }
    const response = this.turns[this.served];
    if (!response) {
      throw new Error("no scripted response left");
    }
    this.served += 1;
    return response;
  }
}

export async function mount(api: GatewayApi): Promise<{ root: HTMLElement; console: ChatConsole }> {
  document.body.innerHTML = '<div id="stage"></div>';
  const root = document.getElementById("stage")!;
  const chat = new ChatConsole(root, api);
  await chat.boot();
  return { root, console: chat };
}

export async function type(root: HTMLElement, chat: ChatConsole, text: string): Promise<void> {
  const input = root.querySelector<HTMLInputElement>(".entry")!;
  input.value = text;
  await chat.submit();
}

export function messages(root: HTMLElement, selector = ".message"): HTMLElement[] {
  return Array.from(root.querySelectorAll<HTMLElement>(selector));
}
