/** Deterministic PRNG so exports reproduce bit-for-bit from a seed. */

export class Rng {
  private state: number
  private spare: number | null = null

  constructor(seed: number) {
    this.state = seed >>> 0
  }

  /** uniform in [0, 1), splitmix32 */
  next(): number {
    this.state = (this.state + 0x9e3779b9) >>> 0
    let z = this.state
    z ^= z >>> 16
    z = Math.imul(z, 0x21f0aaad)
    z ^= z >>> 15
    z = Math.imul(z, 0x735a2d97)
    z ^= z >>> 15
    return (z >>> 0) / 4294967296
  }

  /** standard normal via Box-Muller (cached pair) */
  gaussian(): number {
    if (this.spare !== null) {
      const v = this.spare
      this.spare = null
      return v
    }
    let u = 0
    while (u === 0) u = this.next()
    const v = this.next()
    const r = Math.sqrt(-2.0 * Math.log(u))
    this.spare = r * Math.sin(2.0 * Math.PI * v)
    return r * Math.cos(2.0 * Math.PI * v)
  }

  gaussianVector(n: number): number[] {
    const out = new Array<number>(n)
    for (let i = 0; i < n; i++) out[i] = this.gaussian()
    return out
  }
}
