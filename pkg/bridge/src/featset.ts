/** FEATSET v1 text format: header "FEATSET v1 <n> <d>" then one row per line.
 *
 * Numbers are serialized with JavaScript's shortest round-trip decimal form,
 * which the core reader parses back to the identical float64.
 */

export function encodeFeatset(rows: number[][]): string {
  if (rows.length === 0) throw new Error('feature set must be non-empty')
  const dim = rows[0].length
  if (dim === 0) throw new Error('feature rows must be non-empty')
  const lines = [`FEATSET v1 ${rows.length} ${dim}`]
  for (const row of rows) {
    if (row.length !== dim) {
      throw new Error(`inconsistent row length ${row.length}, expected ${dim}`)
    }
    for (const v of row) {
      if (!Number.isFinite(v)) throw new Error('feature values must be finite')
    }
    lines.push(row.map((v) => v.toString()).join(' '))
  }
  return lines.join('\n') + '\n'
}

export function decodeFeatset(text: string): number[][] {
  const lines = text.split('\n')
  const header = lines[0].split(/\s+/)
  if (header[0] !== 'FEATSET' || header[1] !== 'v1' || header.length !== 4) {
    throw new Error(`bad FEATSET header: ${lines[0]}`)
  }
  const n = parseInt(header[2], 10)
  const d = parseInt(header[3], 10)
  const rows: number[][] = []
  for (let i = 0; i < n; i++) {
    const parts = lines[1 + i].trim().split(/\s+/)
    if (parts.length !== d) {
      throw new Error(`row ${i} has ${parts.length} values, header says ${d}`)
    }
    rows.push(parts.map(Number))
  }
  return rows
}
