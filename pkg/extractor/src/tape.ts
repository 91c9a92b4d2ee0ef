/**
 * Tape-based scalar autograd with exact Hessian-vector products.
 *
 * A tape records the computation once (parameters are leaves, data are
 * constants); forward passes re-evaluate it for new parameter values, the
 * reverse pass accumulates first derivatives, and the dual-number
 * forward-over-reverse pass yields exact H*v products without finite
 * differencing. Graphs stay fixed across training steps, so everything runs
 * on preallocated typed arrays.
 */

export const enum Op {
  Const,
  Param,
  Add,
  Sub,
  Mul,
  Neg,
  Tanh,
  Exp,
  Log,
  Square,
}

export class Tape {
  private ops: number[] = [];
  private ia: number[] = [];
  private ib: number[] = [];
  private constVal: number[] = [];
  paramNodes: number[] = [];

  private op!: Int32Array;
  private a!: Int32Array;
  private b!: Int32Array;
  private init!: Float64Array;
  val!: Float64Array;
  private dot!: Float64Array;
  private adj!: Float64Array;
  private adjDot!: Float64Array;
  private sealed = false;

  get size(): number {
    return this.sealed ? this.op.length : this.ops.length;
  }

  get nParams(): number {
    return this.paramNodes.length;
  }

  private node(op: Op, a = -1, b = -1, value = 0): number {
    if (this.sealed) throw new Error("tape is sealed");
    this.ops.push(op);
    this.ia.push(a);
    this.ib.push(b);
    this.constVal.push(value);
    return this.ops.length - 1;
  }

  constant(x: number): number {
    return this.node(Op.Const, -1, -1, x);
  }

  param(): number {
    const id = this.node(Op.Param);
    this.paramNodes.push(id);
    return id;
  }

  add(x: number, y: number): number {
    return this.node(Op.Add, x, y);
  }

  sub(x: number, y: number): number {
    return this.node(Op.Sub, x, y);
  }

  mul(x: number, y: number): number {
    return this.node(Op.Mul, x, y);
  }

  neg(x: number): number {
    return this.node(Op.Neg, x);
  }

  tanh(x: number): number {
    return this.node(Op.Tanh, x);
  }

  exp(x: number): number {
    return this.node(Op.Exp, x);
  }

  log(x: number): number {
    return this.node(Op.Log, x);
  }

  square(x: number): number {
    return this.node(Op.Square, x);
  }

  /** Sum of a list of nodes as a balanced tree (keeps graphs shallow). */
  sum(nodes: number[]): number {
    if (nodes.length === 0) return this.constant(0);
    let layer = nodes.slice();
    while (layer.length > 1) {
      const next: number[] = [];
      for (let i = 0; i + 1 < layer.length; i += 2) next.push(this.add(layer[i], layer[i + 1]));
      if (layer.length % 2 === 1) next.push(layer[layer.length - 1]);
      layer = next;
    }
    return layer[0];
  }

  /** Affine combination sum_i w_i * x_i + bias. */
  affine(weights: number[], inputs: number[], bias: number): number {
    const terms = weights.map((w, i) => this.mul(w, inputs[i]));
    return this.add(this.sum(terms), bias);
  }

  seal(): void {
    if (this.sealed) return;
    this.op = Int32Array.from(this.ops);
    this.a = Int32Array.from(this.ia);
    this.b = Int32Array.from(this.ib);
    this.init = Float64Array.from(this.constVal);
    const n = this.op.length;
    this.val = new Float64Array(n);
    this.dot = new Float64Array(n);
    this.adj = new Float64Array(n);
    this.adjDot = new Float64Array(n);
    this.sealed = true;
  }

  /** Recompute all node values for the given parameter vector. */
  forward(params: Float64Array): number {
    this.seal();
    const { op, a, b, val, init } = this;
    const paramNodes = this.paramNodes;
    for (let k = 0; k < paramNodes.length; k++) val[paramNodes[k]] = params[k];
    for (let i = 0; i < op.length; i++) {
      switch (op[i]) {
        case Op.Const: val[i] = init[i]; break;
        case Op.Param: break;
        case Op.Add: val[i] = val[a[i]] + val[b[i]]; break;
        case Op.Sub: val[i] = val[a[i]] - val[b[i]]; break;
        case Op.Mul: val[i] = val[a[i]] * val[b[i]]; break;
        case Op.Neg: val[i] = -val[a[i]]; break;
        case Op.Tanh: val[i] = Math.tanh(val[a[i]]); break;
        case Op.Exp: val[i] = Math.exp(val[a[i]]); break;
        case Op.Log: val[i] = Math.log(val[a[i]]); break;
        case Op.Square: val[i] = val[a[i]] * val[a[i]]; break;
      }
    }
    return val[op.length - 1];
  }

  /**
   * Reverse pass for d(out)/d(params); call forward() first.
   * Writes into `grad` and returns it.
   */
  gradient(out: number, grad: Float64Array): Float64Array {
    const { op, a, b, val, adj } = this;
    adj.fill(0);
    adj[out] = 1;
    for (let i = out; i >= 0; i--) {
      const g = adj[i];
      if (g === 0) continue;
      switch (op[i]) {
        case Op.Add: adj[a[i]] += g; adj[b[i]] += g; break;
        case Op.Sub: adj[a[i]] += g; adj[b[i]] -= g; break;
        case Op.Mul: adj[a[i]] += g * val[b[i]]; adj[b[i]] += g * val[a[i]]; break;
        case Op.Neg: adj[a[i]] -= g; break;
        case Op.Tanh: adj[a[i]] += g * (1 - val[i] * val[i]); break;
        case Op.Exp: adj[a[i]] += g * val[i]; break;
        case Op.Log: adj[a[i]] += g / val[a[i]]; break;
        case Op.Square: adj[a[i]] += g * 2 * val[a[i]]; break;
      }
    }
    const paramNodes = this.paramNodes;
    for (let k = 0; k < paramNodes.length; k++) grad[k] = adj[paramNodes[k]];
    return grad;
  }

  /**
   * Exact Hessian-vector product via dual numbers through both passes;
   * call forward() first. Writes H*v into `result` and returns it.
   */
  hvp(out: number, v: Float64Array, result: Float64Array): Float64Array {
    const { op, a, b, val, dot, adj, adjDot } = this;
    const paramNodes = this.paramNodes;
    dot.fill(0);
    for (let k = 0; k < paramNodes.length; k++) dot[paramNodes[k]] = v[k];
    for (let i = 0; i <= out; i++) {
      switch (op[i]) {
        case Op.Const: dot[i] = 0; break;
        case Op.Param: break;
        case Op.Add: dot[i] = dot[a[i]] + dot[b[i]]; break;
        case Op.Sub: dot[i] = dot[a[i]] - dot[b[i]]; break;
        case Op.Mul: dot[i] = dot[a[i]] * val[b[i]] + val[a[i]] * dot[b[i]]; break;
        case Op.Neg: dot[i] = -dot[a[i]]; break;
        case Op.Tanh: dot[i] = (1 - val[i] * val[i]) * dot[a[i]]; break;
        case Op.Exp: dot[i] = val[i] * dot[a[i]]; break;
        case Op.Log: dot[i] = dot[a[i]] / val[a[i]]; break;
        case Op.Square: dot[i] = 2 * val[a[i]] * dot[a[i]]; break;
      }
    }
    adj.fill(0);
    adjDot.fill(0);
    adj[out] = 1;
    for (let i = out; i >= 0; i--) {
      const g = adj[i];
      const gd = adjDot[i];
      if (g === 0 && gd === 0) continue;
      switch (op[i]) {
        case Op.Add:
          adj[a[i]] += g; adjDot[a[i]] += gd;
          adj[b[i]] += g; adjDot[b[i]] += gd;
          break;
        case Op.Sub:
          adj[a[i]] += g; adjDot[a[i]] += gd;
          adj[b[i]] -= g; adjDot[b[i]] -= gd;
          break;
        case Op.Mul:
          adj[a[i]] += g * val[b[i]];
          adjDot[a[i]] += gd * val[b[i]] + g * dot[b[i]];
          adj[b[i]] += g * val[a[i]];
          adjDot[b[i]] += gd * val[a[i]] + g * dot[a[i]];
          break;
        case Op.Neg:
          adj[a[i]] -= g; adjDot[a[i]] -= gd;
          break;
        case Op.Tanh: {
          const p = 1 - val[i] * val[i];
          adj[a[i]] += g * p;
          adjDot[a[i]] += gd * p + g * (-2 * val[i] * dot[i]);
          break;
        }
        case Op.Exp:
          adj[a[i]] += g * val[i];
          adjDot[a[i]] += gd * val[i] + g * dot[i];
          break;
        case Op.Log: {
          const inv = 1 / val[a[i]];
          adj[a[i]] += g * inv;
          adjDot[a[i]] += gd * inv + g * (-dot[a[i]] * inv * inv);
          break;
        }
        case Op.Square:
          adj[a[i]] += g * 2 * val[a[i]];
          adjDot[a[i]] += gd * 2 * val[a[i]] + g * 2 * dot[a[i]];
          break;
      }
    }
    for (let k = 0; k < paramNodes.length; k++) result[k] = adjDot[paramNodes[k]];
    return result;
  }
}
