// Pure DOM-string renderers for the panels. Each takes model data and
// returns innerHTML; the app assigns it to the matching container.

import { AmplitudeRow, FactorBlock, ProgramLine, SessionModel } from "./model.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function phaseOf(re: number, im: number): number {
  return Math.atan2(im, re);
}

export function renderListing(program: ProgramLine[], pc: number,
                              breakpoints: Set<number>): string {
  const rows = program.map((stmt) => {
    const current = stmt.index === pc ? " class=\"current\"" : "";
    const marker = breakpoints.has(stmt.index) ? "●" : "";
    const line = stmt.line === null ? "" : `L${stmt.line}`;
    return `<tr${current} data-index="${stmt.index}">` +
      `<td class="bp">${marker}</td>` +
      `<td class="idx">${stmt.index}</td>` +
      `<td class="src">${line}</td>` +
      `<td class="text">${esc(stmt.text)}</td></tr>`;
  });
  return `<table class="listing"><tbody>${rows.join("")}</tbody></table>`;
}

export function renderAmplitudes(rows: AmplitudeRow[]): string {
  const body = rows.map((row) => {
    const phase = phaseOf(row.re, row.im);
    const width = Math.round(row.prob * 100);
    return `<tr class="amp-row">` +
      `<td class="bits">${row.bits}</td>` +
      `<td class="prob">${row.prob.toFixed(6)}</td>` +
      `<td class="phase">${phase.toFixed(3)}</td>` +
      `<td class="bar"><div style="width:${width}%"></div></td></tr>`;
  });
  return `<table class="amps"><thead><tr>` +
    `<th>basis</th><th>|amp|&sup2;</th><th>phase</th><th></th>` +
    `</tr></thead><tbody>${body.join("")}</tbody></table>`;
}

export function renderFactor(blocks: FactorBlock[], residual: number): string {
  const parts = blocks.map((block) => {
    const label = block.qubits.map((q) => `q${q}`).join(",");
    const amps = block.amplitudes.map((a) =>
      `<li>|${a.bits}&rang; ${a.re.toFixed(4)}${a.im >= 0 ? "+" : ""}${a.im.toFixed(4)}i</li>`);
    return `<div class="factor-block" data-qubits="${block.qubits.join(",")}">` +
      `<h4>[${label}]</h4><ul>${amps.join("")}</ul></div>`;
  });
  return `<div class="residual">residual &sigma;&#8322; = ${residual.toExponential(2)}</div>` +
    parts.join("");
}

export function renderHistogram(shots: number,
                                counts: Record<string, number>,
                                expected?: Record<string, number>,
                                threshold = 0.05): string {
  const keys = Object.keys(counts).sort();
  let worst = 0;
  const rows = keys.map((key) => {
    const freq = counts[key] / shots;
    let extra = "";
    if (expected) {
      const want = expected[key] ?? 0;
      worst = Math.max(worst, Math.abs(freq - want));
      extra = `<td class="want">${want.toFixed(4)}</td>`;
    }
    return `<tr><td>${key}</td><td>${counts[key]}</td>` +
      `<td>${freq.toFixed(4)}</td>${extra}` +
      `<td class="bar"><div style="width:${Math.round(freq * 100)}%"></div></td></tr>`;
  });
  let badge = "";
  if (expected) {
    const ok = worst <= threshold;
    badge = `<span class="badge ${ok ? "pass" : "fail"}">${ok ? "PASS" : "FAIL"}</span>`;
  }
  return `<div class="hist-head">${shots} shots ${badge}</div>` +
    `<table class="hist"><tbody>${rows.join("")}</tbody></table>`;
}

export function renderStatus(model: SessionModel): string {
  const cregs = Object.entries(model.cregs)
    .map(([name, bits]) => `${name}=${bits}`).join(" ");
  const err = model.lastError ? ` <span class="error">${esc(model.lastError)}</span>` : "";
  return `pc=${model.pc} ${model.status} ${cregs}${err}`;
}
