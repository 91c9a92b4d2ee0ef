/**
 * Diagonal-curvature estimators.
 *
 * Exact: one Hessian-vector product per coordinate with a basis vector, take
 * the matching component. Hutchinson: average z * (H z) over Rademacher
 * probes, which is unbiased for the diagonal. Negative estimates are clamped
 * to zero afterwards (stochastic estimates dip below zero even near a
 * minimum, and the downstream format requires non-negative entries).
 */

import { Rng } from "./rng";
import { Tape } from "./tape";

export function exactDiagonal(tape: Tape, loss: number, params: Float64Array): Float64Array {
  const n = params.length;
  const basis = new Float64Array(n);
  const product = new Float64Array(n);
  const diag = new Float64Array(n);
  tape.forward(params);
  for (let d = 0; d < n; d++) {
    basis.fill(0);
    basis[d] = 1;
    tape.hvp(loss, basis, product);
    diag[d] = product[d];
  }
  return diag;
}

export function hutchinsonDiagonal(
  tape: Tape,
  loss: number,
  params: Float64Array,
  probes: number,
  rng: Rng,
): Float64Array {
  if (probes < 1) throw new Error("hutchinson needs at least one probe");
  const n = params.length;
  const z = new Float64Array(n);
  const product = new Float64Array(n);
  const acc = new Float64Array(n);
  tape.forward(params);
  for (let s = 0; s < probes; s++) {
    for (let i = 0; i < n; i++) z[i] = rng.rademacher();
    tape.hvp(loss, z, product);
    for (let i = 0; i < n; i++) acc[i] += z[i] * product[i];
  }
  for (let i = 0; i < n; i++) acc[i] /= probes;
  return acc;
}

export interface ClampResult {
  values: Float64Array;
  clamped: number;
}

export function clampNegatives(values: Float64Array): ClampResult {
  const out = new Float64Array(values.length);
  let clamped = 0;
  for (let i = 0; i < values.length; i++) {
    if (values[i] < 0) {
      clamped += 1;
      out[i] = 0;
    } else {
      out[i] = values[i];
    }
  }
  return { values: out, clamped };
}
