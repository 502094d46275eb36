/** Binary PPM (P6) / PGM (P5) codec matching the core's image interchange.
 *
 * Pixels travel as [0, 1] floats; writing quantizes with round-half-up to
 * 8-bit maxval 255, identical to the core writer, so round trips through
 * either side agree byte for byte.
 */

export interface Image {
  width: number
  height: number
  channels: 1 | 3
  /** row-major H*W*C values in [0, 1] */
  pixels: Float64Array
}

export function grayOf(img: Image): Float64Array {
  const { width, height, channels, pixels } = img
  const out = new Float64Array(width * height)
  if (channels === 1) {
    out.set(pixels)
    return out
  }
  for (let i = 0; i < width * height; i++) {
    out[i] =
      0.299 * pixels[3 * i] + 0.587 * pixels[3 * i + 1] + 0.114 * pixels[3 * i + 2]
  }
  return out
}

export function encodePpm(img: Image): Buffer {
  const magic = img.channels === 1 ? 'P5' : 'P6'
  const header = Buffer.from(`${magic}\n${img.width} ${img.height}\n255\n`, 'ascii')
  const data = Buffer.alloc(img.pixels.length)
  for (let i = 0; i < img.pixels.length; i++) {
    const q = Math.floor(img.pixels[i] * 255.0 + 0.5)
    data[i] = q < 0 ? 0 : q > 255 ? 255 : q
  }
  return Buffer.concat([header, data])
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d || byte === 0x0c
}

function readToken(buf: Buffer, pos: number): [string, number] {
  const n = buf.length
  while (pos < n) {
    if (isSpace(buf[pos])) {
      pos++
    } else if (buf[pos] === 0x23 /* # */) {
      while (pos < n && buf[pos] !== 0x0a) pos++
    } else {
      break
    }
  }
  const start = pos
  while (pos < n && !isSpace(buf[pos])) pos++
  if (start === pos) throw new Error('truncated PNM header')
  return [buf.subarray(start, pos).toString('ascii'), pos]
}

export function decodePpm(buf: Buffer): Image {
  let pos = 0
  let magic: string
  ;[magic, pos] = readToken(buf, pos)
  if (magic !== 'P5' && magic !== 'P6') {
    throw new Error(`unsupported PNM magic ${magic} (binary P5/P6 only)`)
  }
  let tok: string
  ;[tok, pos] = readToken(buf, pos)
  const width = parseInt(tok, 10)
  ;[tok, pos] = readToken(buf, pos)
  const height = parseInt(tok, 10)
  ;[tok, pos] = readToken(buf, pos)
  const maxval = parseInt(tok, 10)
  if (maxval !== 255) throw new Error(`maxval must be 255, got ${maxval}`)
  pos++ // single whitespace byte after maxval
  const channels = magic === 'P5' ? 1 : 3
  const need = width * height * channels
  if (buf.length - pos < need) {
    throw new Error(`expected ${need} pixel bytes, found ${buf.length - pos}`)
  }
  const pixels = new Float64Array(need)
  for (let i = 0; i < need; i++) pixels[i] = buf[pos + i] / 255.0
  return { width, height, channels: channels as 1 | 3, pixels }
}
