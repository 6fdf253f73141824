// Client side of the newline-delimited JSON debug protocol.
//
// The transport delivers one protocol message per call (the WebSocket relay
// turns TCP lines into discrete messages), so no line re-assembly happens
// here. Requests are matched to responses by id; `stopped` and other events
// go to subscribers.

export interface ProtocolError {
  code: string;
  message: string;
}

export interface Response {
  id: number | null;
  ok: boolean;
  result?: any;
  error?: ProtocolError;
}

export interface ProtocolEvent {
  event: string;
  body: any;
}

export interface Transport {
  send(data: string): void;
  onMessage(cb: (data: string) => void): void;
  onClose(cb: () => void): void;
  close(): void;
}

export class RequestFailed extends Error {
  constructor(public code: string, message: string) {
    super(message);
  }
}

type Pending = {
  resolve: (result: any) => void;
  reject: (err: Error) => void;
};

export class ProtocolClient {
  private nextId = 1;
  private pending = new Map<number, Pending>();
  private eventSubs: Array<(ev: ProtocolEvent) => void> = [];
  private protocolErrorSubs: Array<(detail: string) => void> = [];
  private closed = false;

  constructor(private transport: Transport) {
    transport.onMessage((data) => this.handleMessage(data));
    transport.onClose(() => this.handleClose());
  }

  request(cmd: string, args: Record<string, unknown> = {}): Promise<any> {
    if (this.closed) {
      return Promise.reject(new RequestFailed("closed", "connection closed"));
    }
    const id = this.nextId++;
    const line = JSON.stringify({ id, cmd, args });
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.transport.send(line);
    });
  }

  onEvent(cb: (ev: ProtocolEvent) => void): void {
    this.eventSubs.push(cb);
  }

  // malformed server messages are reported here; the session survives them
  onProtocolError(cb: (detail: string) => void): void {
    this.protocolErrorSubs.push(cb);
  }

  close(): void {
    this.transport.close();
  }

  private handleMessage(data: string): void {
    let msg: any;
    try {
      msg = JSON.parse(data);
    } catch {
      this.protocolErrorSubs.forEach((cb) => cb(`unparseable message: ${data.slice(0, 80)}`));
      return;
    }
    if (msg && typeof msg === "object" && "event" in msg) {
      this.eventSubs.forEach((cb) => cb(msg as ProtocolEvent));
      return;
    }
    if (!msg || typeof msg !== "object" || !("id" in msg)) {
      this.protocolErrorSubs.forEach((cb) => cb("message is neither response nor event"));
      return;
    }
    const resp = msg as Response;
    const waiter = resp.id === null ? undefined : this.pending.get(resp.id);
    if (!waiter) {
      this.protocolErrorSubs.forEach((cb) => cb(`response for unknown id ${resp.id}`));
      return;
    }
    this.pending.delete(resp.id as number);
    if (resp.ok) {
      waiter.resolve(resp.result);
    } else {
      const err = resp.error ?? { code: "error", message: "unknown error" };
      waiter.reject(new RequestFailed(err.code, err.message));
    }
  }

  private handleClose(): void {
    this.closed = true;
    for (const waiter of this.pending.values()) {
      waiter.reject(new RequestFailed("closed", "connection closed"));
    }
    this.pending.clear();
  }
}

// Browser transport: one WebSocket message per protocol line. The WebSocket
// constructor is injected so tests can pass the `ws` package's client.
export function wsTransport(ws: WebSocket): Transport {
  const messageSubs: Array<(data: string) => void> = [];
  const closeSubs: Array<() => void> = [];
  ws.addEventListener("message", (ev: MessageEvent) => {
    messageSubs.forEach((cb) => cb(String(ev.data)));
  });
  ws.addEventListener("close", () => closeSubs.forEach((cb) => cb()));
  return {
    send: (data) => ws.send(data),
    onMessage: (cb) => messageSubs.push(cb),
    onClose: (cb) => closeSubs.push(cb),
    close: () => ws.close(),
  };
}
