/** Deterministic slot-order shuffling, seeded by tuple id.
 *
 * Sentences are shown in a randomized slot order to reduce position bias;
 * seeding by tuple_id keeps the order stable across refetches of the same
 * tuple and identical for every annotator session.
 */

export function hashString(s: string): number {
  // FNV-1a, 32 bit
  let h = 0x811c9dc5
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i)
    h = Math.imul(h, 0x01000193)
  }
  return h >>> 0
}

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0
  return () => {
    a = (a + 0x6d2b79f5) >>> 0
    let t = a
    t = Math.imul(t ^ (t >>> 15), t | 1)
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61)
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

/** Permutation of 0..n-1, deterministic for a given key. */
export function seededSlotOrder(key: string, n = 4): number[] {
  const rand = mulberry32(hashString(key))
  const order = Array.from({ length: n }, (_, i) => i)
  for (let i = n - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1))
    ;[order[i], order[j]] = [order[j], order[i]]
  }
  return order
}
