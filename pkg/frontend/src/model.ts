// Session view model: everything the panels render, fed exclusively by
// protocol responses and events.

import { ProtocolClient } from "./protocol.js";

export interface ProgramLine {
  index: number;
  text: string;
  line: number | null;
}

export interface AmplitudeRow {
  bits: string;
  re: number;
  im: number;
  prob: number;
}

export interface FactorBlock {
  qubits: number[];
  amplitudes: { bits: string; re: number; im: number }[];
}

export interface StopInfo {
  status: string;
  pc: number;
  finished: boolean;
  cregs: Record<string, string>;
  next?: string;
  span?: { line: number; column: number };
}

export class SessionModel {
  program: ProgramLine[] = [];
  qubits = 0;
  pc = 0;
  status = "disconnected";
  finished = false;
  cregs: Record<string, string> = {};
  breakpoints = new Set<number>();
  amplitudes: AmplitudeRow[] = [];
  factorBlocks: FactorBlock[] | null = null;
  factorResidual = 0;
  distribution: { shots: number; counts: Record<string, number> } | null = null;
  busy = false;
  lastError = "";

  constructor(private client: ProtocolClient) {
    client.onEvent((ev) => {
      if (ev.event === "stopped") this.applyStop(ev.body as StopInfo);
    });
  }

  async launch(source: string, seed: number): Promise<void> {
    const result = await this.guard(() =>
      this.client.request("launch", { source, seed }));
    this.program = result.program;
    this.qubits = result.qubits;
    this.pc = 0;
    this.finished = false;
    this.status = "stopped:entry";
    this.cregs = {};
    this.breakpoints.clear();
    this.factorBlocks = null;
    this.distribution = null;
    await this.refreshState();
  }

  async step(force?: number): Promise<void> {
    const args = force === undefined ? {} : { force };
    await this.guard(() => this.client.request("step", args));
    await this.refreshState();
  }

  async continueRun(): Promise<void> {
    await this.guard(() => this.client.request("continue"));
    await this.refreshState();
  }

  async toggleBreakpoint(index: number): Promise<void> {
    const cmd = this.breakpoints.has(index) ? "clearBreakpoint" : "setBreakpoint";
    const result = await this.guard(() => this.client.request(cmd, { index }));
    this.breakpoints = new Set(result.breakpoints);
  }

  async refreshState(): Promise<void> {
    const result = await this.guard(() =>
      this.client.request("inspect", { kind: "state" }));
    this.amplitudes = result.amplitudes;
  }

  async refreshFactor(): Promise<void> {
    const result = await this.guard(() =>
      this.client.request("inspect", { kind: "factor" }));
    this.factorBlocks = result.blocks;
    this.factorResidual = result.residual;
  }

  async runShots(shots: number, seed: number): Promise<void> {
    this.distribution = await this.guard(() =>
      this.client.request("runShots", { shots, seed }));
  }

  probabilitySum(): number {
    return this.amplitudes.reduce((acc, row) => acc + row.prob, 0);
  }

  private applyStop(stop: StopInfo): void {
    this.pc = stop.pc;
    this.status = stop.status;
    this.finished = stop.finished;
    this.cregs = stop.cregs;
  }

  // serializes commands: controls stay disabled while a request is in flight
  private async guard<T>(fn: () => Promise<T>): Promise<T> {
    if (this.busy) throw new Error("request already in flight");
    this.busy = true;
    try {
      const result = await fn();
      this.lastError = "";
      return result;
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
      throw err;
    } finally {
      this.busy = false;
    }
  }
}
