// Wires the session model to the page: connection form, step controls,
// panels. All state shown comes from protocol messages; nothing is
// computed client-side beyond display formatting.

import { ProtocolClient, Transport, wsTransport } from "./protocol.js";
import { SessionModel } from "./model.js";
import {
  renderAmplitudes, renderFactor, renderHistogram, renderListing,
  renderStatus,
} from "./render.js";

export class App {
  model: SessionModel | null = null;
  private client: ProtocolClient | null = null;

  constructor(private doc: Document) {}

  connect(transport: Transport): void {
    this.client = new ProtocolClient(transport);
    this.client.onProtocolError((detail) => this.toast(`protocol error: ${detail}`));
    this.model = new SessionModel(this.client);
    this.banner("");
    this.bindControls();
  }

  connectWebSocket(url: string, wsCtor: typeof WebSocket = WebSocket): void {
    const ws = new wsCtor(url);
    ws.addEventListener("error", () => this.banner(`cannot reach ${url}`));
    this.connect(wsTransport(ws));
  }

  async launch(source: string, seed: number): Promise<void> {
    if (!this.model) throw new Error("not connected");
    await this.model.launch(source, seed);
    this.redraw();
  }

  async step(force?: number): Promise<void> {
    await this.model!.step(force);
    this.redraw();
  }

  async continueRun(): Promise<void> {
    await this.model!.continueRun();
    this.redraw();
  }

  async toggleBreakpoint(index: number): Promise<void> {
    await this.model!.toggleBreakpoint(index);
    this.redraw();
  }

  async showFactor(): Promise<void> {
    await this.model!.refreshFactor();
    this.redraw();
  }

  async runShots(shots: number, seed: number): Promise<void> {
    await this.model!.runShots(shots, seed);
    this.redraw();
  }

  redraw(): void {
    const model = this.model!;
    this.setHtml("#listing", renderListing(model.program, model.pc, model.breakpoints));
    this.setHtml("#amplitudes", renderAmplitudes(model.amplitudes));
    this.setHtml("#status", renderStatus(model));
    if (model.factorBlocks) {
      this.setHtml("#factor", renderFactor(model.factorBlocks, model.factorResidual));
    }
    if (model.distribution) {
      this.setHtml("#histogram",
        renderHistogram(model.distribution.shots, model.distribution.counts));
    }
    this.doc.querySelectorAll<HTMLButtonElement>(".control").forEach((btn) => {
      btn.disabled = model.busy;
    });
  }

  private bindControls(): void {
    const on = (sel: string, fn: () => void) => {
      const el = this.doc.querySelector(sel);
      if (el) el.addEventListener("click", () => { fn(); });
    };
    on("#btn-launch", () => {
      const source = (this.doc.querySelector("#source") as HTMLTextAreaElement).value;
      const seed = Number((this.doc.querySelector("#seed") as HTMLInputElement).value) || 0;
      this.launch(source, seed).catch((err) => this.toast(String(err)));
    });
    on("#btn-step", () => this.step().catch((err) => this.toast(String(err))));
    on("#btn-force0", () => this.step(0).catch((err) => this.toast(String(err))));
    on("#btn-force1", () => this.step(1).catch((err) => this.toast(String(err))));
    on("#btn-continue", () => this.continueRun().catch((err) => this.toast(String(err))));
    on("#btn-factor", () => this.showFactor().catch((err) => this.toast(String(err))));
    on("#btn-shots", () => this.runShots(10000, 7).catch((err) => this.toast(String(err))));
    const listing = this.doc.querySelector("#listing");
    if (listing) {
      listing.addEventListener("click", (ev) => {
        const row = (ev.target as Element).closest("tr[data-index]");
        if (row) {
          this.toggleBreakpoint(Number(row.getAttribute("data-index")))
            .catch((err) => this.toast(String(err)));
        }
      });
    }
  }

  private setHtml(sel: string, html: string): void {
    const el = this.doc.querySelector(sel);
    if (el) el.innerHTML = html;
  }

  private banner(text: string): void {
    const el = this.doc.querySelector("#banner");
    if (el) {
      el.textContent = text;
      (el as HTMLElement).style.display = text ? "block" : "none";
    }
  }

  private toast(text: string): void {
    const el = this.doc.querySelector("#toast");
    if (el) el.textContent = text;
  }
}
