/**
 * Decoder-only transformer, written directly over flat Float64Arrays with a
 * hand-derived backward pass. Prompts are two tokens (language marker, key)
 * and the loss sits on the next-token prediction of the final position, so
 * sequences are length 2 end to end.
 *
 * Parameter names follow the layer-indexed block layout the checkpoint
 * tooling classifies (blocks.N.attn.*, blocks.N.mlp.*, norms, embeddings,
 * head).
 */

import { gauss, mulberry32, type Rng } from "./rng.js";
import { readSafetensors, writeSafetensors, type TensorEntry } from "./safetensors.js";

export interface ModelConfig {
  vocabSize: number;
  dModel: number;
  nHeads: number;
  nLayers: number;
  mlpHidden: number;
  seqLen: number;
}

export function defaultConfig(vocabSize: number): ModelConfig {
  return {
    vocabSize,
    dModel: 64,
    nHeads: 4,
    nLayers: 4,
    mlpHidden: 256,
    seqLen: 2,
  };
}

export interface Param {
  name: string;
  shape: number[];
  data: Float64Array;
  grad: Float64Array;
}

const EPS = 1e-5;

export class Model {
  cfg: ModelConfig;
  params: Param[] = [];
  byName = new Map<string, Param>();

  constructor(cfg: ModelConfig) {
    this.cfg = cfg;
    const { vocabSize: V, dModel: D, nLayers: L, mlpHidden: F, seqLen: T } = cfg;
    this.add("tok_embed.weight", [V, D]);
    this.add("pos_embed.weight", [T, D]);
    for (let l = 0; l < L; l++) {
      const p = `blocks.${l}`;
      this.add(`${p}.norm1.weight`, [D]);
      this.add(`${p}.attn.wq.weight`, [D, D]);
      this.add(`${p}.attn.wk.weight`, [D, D]);
      this.add(`${p}.attn.wv.weight`, [D, D]);
      this.add(`${p}.attn.wo.weight`, [D, D]);
      this.add(`${p}.norm2.weight`, [D]);
      this.add(`${p}.mlp.w1.weight`, [F, D]);
      this.add(`${p}.mlp.w1.bias`, [F]);
      this.add(`${p}.mlp.w2.weight`, [D, F]);
      this.add(`${p}.mlp.w2.bias`, [D]);
    }
    this.add("final_norm.weight", [D]);
    this.add("head.weight", [V, D]);
  }

  private add(name: string, shape: number[]): void {
    const n = shape.reduce((a, b) => a * b, 1);
    const param = {
      name,
      shape,
      data: new Float64Array(n),
      grad: new Float64Array(n),
    };
    this.params.push(param);
    this.byName.set(name, param);
  }

  get(name: string): Float64Array {
    const p = this.byName.get(name);
    if (!p) throw new Error(`unknown parameter ${name}`);
    return p.data;
  }

  grad(name: string): Float64Array {
    return this.byName.get(name)!.grad;
  }

  init(seed: number): void {
    const rng: Rng = mulberry32(seed);
    for (const p of this.params) {
      if (p.name.endsWith(".bias")) {
        p.data.fill(0);
      } else if (p.name.includes("norm")) {
        p.data.fill(1);
      } else {
        for (let i = 0; i < p.data.length; i++) p.data[i] = gauss(rng, 0, 0.02);
      }
    }
  }

  zeroGrads(): void {
    for (const p of this.params) p.grad.fill(0);
  }

  save(path: string): void {
    const entries: TensorEntry[] = this.params.map((p) => ({
      name: p.name,
      shape: p.shape,
      data: Float32Array.from(p.data),
    }));
    writeSafetensors(path, entries);
  }

  load(path: string): void {
    const stored = readSafetensors(path);
    for (const p of this.params) {
      const entry = stored.get(p.name);
      if (!entry) throw new Error(`checkpoint missing tensor ${p.name}`);
      if (entry.data.length !== p.data.length) {
        throw new Error(`checkpoint shape mismatch for ${p.name}`);
      }
      for (let i = 0; i < p.data.length; i++) p.data[i] = entry.data[i];
    }
    if (stored.size !== this.params.length) {
      throw new Error(
        `checkpoint has ${stored.size} tensors, model has ${this.params.length}`,
      );
    }
  }
}

/** y[r,:] = W x[r,:] for W [out,in]; rows are independent. */
function linearForward(
  x: Float64Array, rows: number, nin: number,
  w: Float64Array, nout: number, y: Float64Array, bias?: Float64Array,
): void {
  for (let r = 0; r < rows; r++) {
    const xr = r * nin;
    const yr = r * nout;
    for (let o = 0; o < nout; o++) {
      let acc = bias ? bias[o] : 0;
      const wo = o * nin;
      for (let i = 0; i < nin; i++) acc += w[wo + i] * x[xr + i];
      y[yr + o] = acc;
    }
  }
}

/** Backprop of linearForward; accumulates into dw, db, dx. */
function linearBackward(
  x: Float64Array, rows: number, nin: number,
  w: Float64Array, nout: number,
  dy: Float64Array, dw: Float64Array, dx: Float64Array | null,
  db?: Float64Array,
): void {
  for (let r = 0; r < rows; r++) {
    const xr = r * nin;
    const yr = r * nout;
    for (let o = 0; o < nout; o++) {
      const g = dy[yr + o];
      if (g === 0) continue;
      const wo = o * nin;
      if (db) db[o] += g;
      for (let i = 0; i < nin; i++) {
        dw[wo + i] += g * x[xr + i];
        if (dx) dx[xr + i] += g * w[wo + i];
      }
    }
  }
}

function rmsnormForward(
  x: Float64Array, rows: number, d: number, w: Float64Array,
  y: Float64Array, scales: Float64Array,
): void {
  for (let r = 0; r < rows; r++) {
    const xr = r * d;
    let ms = 0;
    for (let i = 0; i < d; i++) ms += x[xr + i] * x[xr + i];
    const s = 1 / Math.sqrt(ms / d + EPS);
    scales[r] = s;
    for (let i = 0; i < d; i++) y[xr + i] = x[xr + i] * s * w[i];
  }
}

function rmsnormBackward(
  x: Float64Array, rows: number, d: number, w: Float64Array,
  scales: Float64Array, dy: Float64Array, dx: Float64Array, dw: Float64Array,
): void {
  for (let r = 0; r < rows; r++) {
    const xr = r * d;
    const s = scales[r];
    let dot = 0;
    for (let i = 0; i < d; i++) {
      const g = dy[xr + i];
      dw[i] += g * x[xr + i] * s;
      dot += g * w[i] * x[xr + i];
    }
    const k = (s * s * s * dot) / d;
    for (let i = 0; i < d; i++) {
      dx[xr + i] += s * w[i] * dy[xr + i] - x[xr + i] * k;
    }
  }
}

interface LayerTape {
  xin: Float64Array;
  s1: Float64Array;
  n1: Float64Array;
  q: Float64Array;
  k: Float64Array;
  v: Float64Array;
  p: Float64Array; // attention probabilities [B,H,T,T]
  ao: Float64Array; // concatenated head outputs before wo
  x2: Float64Array;
  s2: Float64Array;
  n2: Float64Array;
  u: Float64Array; // post-relu mlp hidden
}

export interface BatchResult {
  loss: number;
  nCorrect: number;
  predictions: Int32Array; // greedy (argmax) next token per sequence
}

/**
 * Forward + backward over a batch; accumulates gradients (caller zeroes).
 * tokens is B*T ids, targets one answer id per sequence; the loss is the
 * mean cross entropy of the final position's next-token prediction.
 */
export function lossBatch(
  model: Model,
  tokens: Int32Array,
  targets: Int32Array,
  batch: number,
  computeGrads = true,
): BatchResult {
  const { dModel: D, nHeads: H, nLayers: L, mlpHidden: F, seqLen: T, vocabSize: V } =
    model.cfg;
  const Dh = D / H;
  const rows = batch * T;
  const tok = model.get("tok_embed.weight");
  const pos = model.get("pos_embed.weight");

  let x = new Float64Array(rows * D);
  for (let r = 0; r < rows; r++) {
    const t = r % T;
    const id = tokens[r];
    for (let i = 0; i < D; i++) x[r * D + i] = tok[id * D + i] + pos[t * D + i];
  }

  const tapes: LayerTape[] = [];
  const invSqrtDh = 1 / Math.sqrt(Dh);

  for (let l = 0; l < L; l++) {
    const p = `blocks.${l}`;
    const tape: LayerTape = {
      xin: x,
      s1: new Float64Array(rows),
      n1: new Float64Array(rows * D),
      q: new Float64Array(rows * D),
      k: new Float64Array(rows * D),
      v: new Float64Array(rows * D),
      p: new Float64Array(batch * H * T * T),
      ao: new Float64Array(rows * D),
      x2: new Float64Array(rows * D),
      s2: new Float64Array(rows),
      n2: new Float64Array(rows * D),
      u: new Float64Array(rows * F),
    };
    rmsnormForward(x, rows, D, model.get(`${p}.norm1.weight`), tape.n1, tape.s1);
    linearForward(tape.n1, rows, D, model.get(`${p}.attn.wq.weight`), D, tape.q);
    linearForward(tape.n1, rows, D, model.get(`${p}.attn.wk.weight`), D, tape.k);
    linearForward(tape.n1, rows, D, model.get(`${p}.attn.wv.weight`), D, tape.v);

    // causal attention, per sequence and head
    for (let b = 0; b < batch; b++) {
      for (let h = 0; h < H; h++) {
        const hOff = h * Dh;
        for (let t = 0; t < T; t++) {
          const qOff = (b * T + t) * D + hOff;
          const pOff = ((b * H + h) * T + t) * T;
          let maxScore = -Infinity;
          for (let u = 0; u <= t; u++) {
            const kOff = (b * T + u) * D + hOff;
            let s = 0;
            for (let i = 0; i < Dh; i++) s += tape.q[qOff + i] * tape.k[kOff + i];
            s *= invSqrtDh;
            tape.p[pOff + u] = s;
            if (s > maxScore) maxScore = s;
          }
          let z = 0;
          for (let u = 0; u <= t; u++) {
            const e = Math.exp(tape.p[pOff + u] - maxScore);
            tape.p[pOff + u] = e;
            z += e;
          }
          const aoOff = (b * T + t) * D + hOff;
          for (let u = 0; u <= t; u++) tape.p[pOff + u] /= z;
          for (let i = 0; i < Dh; i++) {
            let acc = 0;
            for (let u = 0; u <= t; u++) {
              acc += tape.p[pOff + u] * tape.v[(b * T + u) * D + hOff + i];
            }
            tape.ao[aoOff + i] = acc;
          }
        }
      }
    }

    // attention output projection + residual
    const attnOut = new Float64Array(rows * D);
    linearForward(tape.ao, rows, D, model.get(`${p}.attn.wo.weight`), D, attnOut);
    for (let i = 0; i < rows * D; i++) tape.x2[i] = x[i] + attnOut[i];

    rmsnormForward(tape.x2, rows, D, model.get(`${p}.norm2.weight`), tape.n2, tape.s2);
    const upre = new Float64Array(rows * F);
    linearForward(
      tape.n2, rows, D, model.get(`${p}.mlp.w1.weight`), F, upre,
      model.get(`${p}.mlp.w1.bias`),
    );
    for (let i = 0; i < rows * F; i++) tape.u[i] = upre[i] > 0 ? upre[i] : 0;
    const mlpOut = new Float64Array(rows * D);
    linearForward(
      tape.u, rows, F, model.get(`${p}.mlp.w2.weight`), D, mlpOut,
      model.get(`${p}.mlp.w2.bias`),
    );
    const xNext = new Float64Array(rows * D);
    for (let i = 0; i < rows * D; i++) xNext[i] = tape.x2[i] + mlpOut[i];

    tapes.push(tape);
    x = xNext;
  }

  // final norm + head on the last position of each sequence
  const xLast = new Float64Array(batch * D);
  for (let b = 0; b < batch; b++) {
    const r = b * T + (T - 1);
    for (let i = 0; i < D; i++) xLast[b * D + i] = x[r * D + i];
  }
  const sf = new Float64Array(batch);
  const nf = new Float64Array(batch * D);
  rmsnormForward(xLast, batch, D, model.get("final_norm.weight"), nf, sf);
  const logits = new Float64Array(batch * V);
  linearForward(nf, batch, D, model.get("head.weight"), V, logits);

  let loss = 0;
  let nCorrect = 0;
  const predictions = new Int32Array(batch);
  const probs = logits; // softmax in place
  for (let b = 0; b < batch; b++) {
    const off = b * V;
    let max = -Infinity;
    let argmax = 0;
    for (let i = 0; i < V; i++) {
      if (probs[off + i] > max) {
        max = probs[off + i];
        argmax = i;
      }
    }
    predictions[b] = argmax;
    let z = 0;
    for (let i = 0; i < V; i++) {
      const e = Math.exp(probs[off + i] - max);
      probs[off + i] = e;
      z += e;
    }
    for (let i = 0; i < V; i++) probs[off + i] /= z;
    loss += -Math.log(probs[off + targets[b]] + 1e-30);
    if (argmax === targets[b]) nCorrect++;
  }
  loss /= batch;

  if (!computeGrads) return { loss, nCorrect, predictions };

  // ---- backward ----
  const dlogits = probs;
  for (let b = 0; b < batch; b++) {
    const off = b * V;
    for (let i = 0; i < V; i++) dlogits[off + i] /= batch;
    dlogits[off + targets[b]] -= 1 / batch;
  }
  const dnf = new Float64Array(batch * D);
  linearBackward(
    nf, batch, D, model.get("head.weight"), V,
    dlogits, model.grad("head.weight"), dnf,
  );
  const dxLast = new Float64Array(batch * D);
  rmsnormBackward(
    xLast, batch, D, model.get("final_norm.weight"), sf,
    dnf, dxLast, model.grad("final_norm.weight"),
  );
  let dx = new Float64Array(rows * D);
  for (let b = 0; b < batch; b++) {
    const r = b * T + (T - 1);
    for (let i = 0; i < D; i++) dx[r * D + i] = dxLast[b * D + i];
  }

  for (let l = L - 1; l >= 0; l--) {
    const p = `blocks.${l}`;
    const tape = tapes[l];

    // mlp backward: dx is the gradient at the layer output x3 = x2 + mlp
    const du = new Float64Array(rows * F);
    linearBackward(
      tape.u, rows, F, model.get(`${p}.mlp.w2.weight`), D,
      dx, model.grad(`${p}.mlp.w2.weight`), du, model.grad(`${p}.mlp.w2.bias`),
    );
    for (let i = 0; i < rows * F; i++) if (tape.u[i] === 0) du[i] = 0;
    const dn2 = new Float64Array(rows * D);
    linearBackward(
      tape.n2, rows, D, model.get(`${p}.mlp.w1.weight`), F,
      du, model.grad(`${p}.mlp.w1.weight`), dn2, model.grad(`${p}.mlp.w1.bias`),
    );
    const dx2 = dx; // residual: dx2 starts as a copy of dx
    rmsnormBackward(
      tape.x2, rows, D, model.get(`${p}.norm2.weight`), tape.s2,
      dn2, dx2, model.grad(`${p}.norm2.weight`),
    );

    // attention backward: x2 = xin + wo(ao)
    const dao = new Float64Array(rows * D);
    linearBackward(
      tape.ao, rows, D, model.get(`${p}.attn.wo.weight`), D,
      dx2, model.grad(`${p}.attn.wo.weight`), dao,
    );
    const dq = new Float64Array(rows * D);
    const dk = new Float64Array(rows * D);
    const dv = new Float64Array(rows * D);
    const Hn = H;
    for (let b = 0; b < batch; b++) {
      for (let h = 0; h < Hn; h++) {
        const hOff = h * Dh;
        for (let t = 0; t < T; t++) {
          const aoOff = (b * T + t) * D + hOff;
          const pOff = ((b * Hn + h) * T + t) * T;
          // dp and softmax backward over positions u <= t
          let dpDotP = 0;
          const dp = new Float64Array(t + 1);
          for (let u = 0; u <= t; u++) {
            let acc = 0;
            for (let i = 0; i < Dh; i++) {
              acc += dao[aoOff + i] * tape.v[(b * T + u) * D + hOff + i];
            }
            dp[u] = acc;
            dpDotP += acc * tape.p[pOff + u];
            for (let i = 0; i < Dh; i++) {
              dv[(b * T + u) * D + hOff + i] +=
                tape.p[pOff + u] * dao[aoOff + i];
            }
          }
          const qOff = (b * T + t) * D + hOff;
          for (let u = 0; u <= t; u++) {
            const ds = tape.p[pOff + u] * (dp[u] - dpDotP) * invSqrtDh;
            const kOff = (b * T + u) * D + hOff;
            for (let i = 0; i < Dh; i++) {
              dq[qOff + i] += ds * tape.k[kOff + i];
              dk[kOff + i] += ds * tape.q[qOff + i];
            }
          }
        }
      }
    }
    const dn1 = new Float64Array(rows * D);
    linearBackward(
      tape.n1, rows, D, model.get(`${p}.attn.wq.weight`), D,
      dq, model.grad(`${p}.attn.wq.weight`), dn1,
    );
    linearBackward(
      tape.n1, rows, D, model.get(`${p}.attn.wk.weight`), D,
      dk, model.grad(`${p}.attn.wk.weight`), dn1,
    );
    linearBackward(
      tape.n1, rows, D, model.get(`${p}.attn.wv.weight`), D,
      dv, model.grad(`${p}.attn.wv.weight`), dn1,
    );
    const dxin = dx2; // residual path: gradient flows through unchanged
    rmsnormBackward(
      tape.xin, rows, D, model.get(`${p}.norm1.weight`), tape.s1,
      dn1, dxin, model.grad(`${p}.norm1.weight`),
    );
    dx = dxin;
  }

  const dtok = model.grad("tok_embed.weight");
  const dpos = model.grad("pos_embed.weight");
  for (let r = 0; r < rows; r++) {
    const t = r % T;
    const id = tokens[r];
    for (let i = 0; i < D; i++) {
      dtok[id * D + i] += dx[r * D + i];
      dpos[t * D + i] += dx[r * D + i];
    }
  }

  return { loss, nCorrect, predictions };
}

/** Greedy next-token prediction for one (marker, key) prompt. */
export function greedyPredict(model: Model, marker: number, key: number): number {
  const tokens = Int32Array.from([marker, key]);
  const result = lossBatch(model, tokens, Int32Array.from([0]), 1, false);
  return result.predictions[0];
}
