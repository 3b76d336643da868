// Gateway client. The gateway speaks plain JSON over three endpoints; the
// Mac OS Roman file protocol stays entirely on its far side.

export interface ScreenHints {
  width: number;
  height: number;
  monochrome: boolean;
}

export interface GatewayConfig {
  doze_message: string;
  max_input_chars: number;
  max_line_bytes: number;
  screen: ScreenHints;
}

export interface TurnResponse {
  lines: string[];
  dozed: boolean;
  turn_id: number;
}

export interface TranscriptEntry {
  request: { text: string };
  response: TurnResponse;
}

export interface GatewayApi {
  config(): Promise<GatewayConfig>;
  transcript(): Promise<TranscriptEntry[]>;
  turn(text: string): Promise<TurnResponse>;
}

export class GatewayError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "GatewayError";
  }
}

async function errorDetail(resp: Response): Promise<string> {
  try {
    const doc = (await resp.json()) as { error?: string };
    if (doc && typeof doc.error === "string") {
      return doc.error;
    }
  } catch {
    // not JSON; fall through
  }
  return `gateway answered ${resp.status}`;
}

export class HttpGatewayApi implements GatewayApi {
  constructor(private readonly base: string = "") {}

  async config(): Promise<GatewayConfig> {
    return this.get<GatewayConfig>("/api/config");
  }

  async transcript(): Promise<TranscriptEntry[]> {
    return this.get<TranscriptEntry[]>("/api/transcript");
  }

  async turn(text: string): Promise<TurnResponse> {
    const resp = await fetch(this.base + "/api/turn", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
    if (!resp.ok) {
      throw new GatewayError(resp.status, await errorDetail(resp));
    }
    return (await resp.json()) as TurnResponse;
  }

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(this.base + path);
    if (!resp.ok) {
      throw new GatewayError(resp.status, await errorDetail(resp));
    }
    return (await resp.json()) as T;
  }
}
