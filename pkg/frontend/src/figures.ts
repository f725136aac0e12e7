/**
 * Figure assembly from solver CSVs.
 *
 * Styling is fixed in code: nonlocal runs are solid curves in palette
 * order (callers pass them ordered by dispersal rate), the classical
 * reference is dashed black; convergence plots are log-log with a
 * slope-one guide through the first point.
 */

import { basename } from "path";

import { readConvergence, readProfile, Profile } from "./csv.js";
import { Curve, Panel, PALETTE, renderFigure } from "./svg.js";

export type FigureKind = "pulse_overlay" | "pulse_zoom" | "convergence_loglog" | "domain_compare";

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  localInput?: string;
  output: string;
  zoom?: [number, number];
}

const DEFAULT_ZOOM: [number, number] = [-5, 5];

function labelFor(path: string): string {
  return basename(path).replace(/\.csv$/, "").replace(/^profile_/, "");
}

function profileCurves(profiles: Profile[], field: "u" | "v",
                       dashedLast: boolean): Curve[] {
  return profiles.map((p, i) => {
    const isRef = dashedLast && i === profiles.length - 1;
    return {
      x: p.x,
      y: p[field],
      color: isRef ? "#000000" : PALETTE[i % PALETTE.length]!,
      dashed: isRef,
      label: profiles.length > 1 ? p.label : undefined,
    };
  });
}

export function pulseFigure(spec: FigureSpec): string {
  const profiles = spec.inputs.map((path) => readProfile(path, labelFor(path)));
  if (spec.localInput) {
    profiles.push(readProfile(spec.localInput, "local"));
  }
  const window = spec.kind === "pulse_zoom" ? (spec.zoom ?? DEFAULT_ZOOM) : undefined;
  const dashed = spec.localInput !== undefined;
  const panels: Panel[] = (["u", "v"] as const).map((field) => ({
    title: `${field} profile${window ? " (zoom)" : ""}`,
    xLabel: "x",
    yLabel: field,
    curves: profileCurves(profiles, field, dashed),
    xWindow: window,
  }));
  return renderFigure(panels);
}

export function convergenceFigure(spec: FigureSpec): string {
  if (spec.inputs.length !== 1) {
    throw new Error("convergence plots take exactly one CSV");
  }
  const rows = readConvergence(spec.inputs[0]!);
  const curves: Curve[] = [
    { x: rows.h, y: rows.errU, color: PALETTE[0]!, label: "err_u", markers: true },
    { x: rows.h, y: rows.errV, color: PALETTE[1]!, label: "err_v", markers: true },
  ];
  if (rows.h.length > 1) {
    const h0 = rows.h[0]!;
    const e0 = rows.errU[0]!;
    curves.push({
      x: rows.h,
      y: rows.h.map((h) => (e0 * h) / h0),
      color: "#999999",
      dashed: true,
      label: "slope 1",
    });
  }
  const panel: Panel = {
    title: "relative error vs mesh size",
    xLabel: "h",
    yLabel: "relative L2 error",
    curves,
    logX: true,
    logY: true,
  };
  return renderFigure([panel]);
}

export function compareFigure(spec: FigureSpec): string {
  const profiles = spec.inputs.map((path) => readProfile(path, labelFor(path)));
  const window = spec.zoom ?? DEFAULT_ZOOM;
  const panels: Panel[] = [
    {
      title: "v profile",
      xLabel: "x",
      yLabel: "v",
      curves: profileCurves(profiles, "v", false),
    },
    {
      title: "v profile (zoom)",
      xLabel: "x",
      yLabel: "v",
      curves: profileCurves(profiles, "v", false),
      xWindow: window,
    },
  ];
  return renderFigure(panels);
}

export function render(spec: FigureSpec): string {
  switch (spec.kind) {
    case "pulse_overlay":
    case "pulse_zoom":
      return pulseFigure(spec);
    case "convergence_loglog":
      return convergenceFigure(spec);
    case "domain_compare":
      return compareFigure(spec);
  }
}
