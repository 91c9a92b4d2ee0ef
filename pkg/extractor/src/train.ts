/** Full-batch Adam on a sealed tape. */

import { Tape } from "./tape";

export interface TrainResult {
  finalLoss: number;
  gradNorm: number;
  steps: number;
}

export interface TrainOptions {
  steps?: number;
  lr?: number;
  tolerance?: number; // stop when the gradient norm falls below this
}

export function trainAdam(
  tape: Tape,
  loss: number,
  params: Float64Array,
  options: TrainOptions = {},
): TrainResult {
  const steps = options.steps ?? 1500;
  const lr = options.lr ?? 0.02;
  const tolerance = options.tolerance ?? 1e-6;
  const beta1 = 0.9;
  const beta2 = 0.999;
  const eps = 1e-8;
  const n = params.length;
  const grad = new Float64Array(n);
  const m = new Float64Array(n);
  const v = new Float64Array(n);
  const norm = (g: Float64Array) => {
    let s = 0;
    for (let i = 0; i < g.length; i++) s += g[i] * g[i];
    return Math.sqrt(s);
  };

  let finalLoss = tape.forward(params);
  let gradNorm = Infinity;
  let step = 0;
  for (; step < steps; step++) {
    finalLoss = tape.forward(params);
    tape.gradient(loss, grad);
    gradNorm = norm(grad);
    if (gradNorm < tolerance) break;
    const t = step + 1;
    const correction1 = 1 - Math.pow(beta1, t);
    const correction2 = 1 - Math.pow(beta2, t);
    for (let i = 0; i < n; i++) {
      m[i] = beta1 * m[i] + (1 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1 - beta2) * grad[i] * grad[i];
      params[i] -= (lr * (m[i] / correction1)) / (Math.sqrt(v[i] / correction2) + eps);
    }
  }
  finalLoss = tape.forward(params);
  tape.gradient(loss, grad);
  gradNorm = norm(grad);
  return { finalLoss, gradNorm, steps: step };
}
