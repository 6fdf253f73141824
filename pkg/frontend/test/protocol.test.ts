import { describe, expect, it } from "vitest";

import { ProtocolClient, RequestFailed, Transport } from "../src/protocol.js";

class FakeTransport implements Transport {
  sent: string[] = [];
  private messageCb: ((data: string) => void) | null = null;
  private closeCb: (() => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }
  onMessage(cb: (data: string) => void): void {
    this.messageCb = cb;
  }
  onClose(cb: () => void): void {
    this.closeCb = cb;
  }
  close(): void {
    this.closeCb?.();
  }
  deliver(msg: unknown): void {
    this.messageCb?.(typeof msg === "string" ? msg : JSON.stringify(msg));
  }
}

describe("ProtocolClient", () => {
  it("matches responses to requests by id", async () => {
    const t = new FakeTransport();
    const client = new ProtocolClient(t);
    const p1 = client.request("launch", { seed: 1 });
    const p2 = client.request("step");
    expect(JSON.parse(t.sent[0]).id).toBe(1);
    expect(JSON.parse(t.sent[1]).id).toBe(2);
    // out-of-order responses still resolve the right promise
    t.deliver({ id: 2, ok: true, result: { pc: 1 } });
    t.deliver({ id: 1, ok: true, result: { qubits: 3 } });
    expect(await p2).toEqual({ pc: 1 });
    expect(await p1).toEqual({ qubits: 3 });
  });

  it("rejects on error responses with the server code", async () => {
    const t = new FakeTransport();
    const client = new ProtocolClient(t);
    const p = client.request("step");
    t.deliver({ id: 1, ok: false, error: { code: "finished", message: "done" } });
    await expect(p).rejects.toSatisfy(
      (err: RequestFailed) => err.code === "finished" && err.message === "done");
  });

  it("routes events to subscribers without touching requests", async () => {
    const t = new FakeTransport();
    const client = new ProtocolClient(t);
    const events: string[] = [];
    client.onEvent((ev) => events.push(ev.event));
    const p = client.request("continue");
    t.deliver({ event: "stopped", body: { pc: 6 } });
    t.deliver({ id: 1, ok: true, result: { pc: 6 } });
    expect(await p).toEqual({ pc: 6 });
    expect(events).toEqual(["stopped"]);
  });

  it("survives malformed server messages", async () => {
    const t = new FakeTransport();
    const client = new ProtocolClient(t);
    const problems: string[] = [];
    client.onProtocolError((detail) => problems.push(detail));
    t.deliver("this is not json");
    t.deliver({ id: 999, ok: true, result: null });
    const p = client.request("step");
    t.deliver({ id: 1, ok: true, result: { pc: 1 } });
    expect(await p).toEqual({ pc: 1 });
    expect(problems.length).toBe(2);
  });

  it("rejects pending requests when the connection closes", async () => {
    const t = new FakeTransport();
    const client = new ProtocolClient(t);
    const p = client.request("step");
    t.close();
    await expect(p).rejects.toSatisfy((err: RequestFailed) => err.code === "closed");
    await expect(client.request("step")).rejects.toSatisfy(
      (err: RequestFailed) => err.code === "closed");
  });
});
