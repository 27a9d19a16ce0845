/**
 * Sample playback: three short synthesized drum samples (bass, slap,
 * jingle) played through WebAudio at the event's intensity. When no
 * AudioContext is available the player degrades to silent visual-only
 * mode and every call is a no-op.
 */

import type { SoundEventPayload } from "./protocol.js";

type ToneName = "bass" | "slap" | "jingle";

function synthesize(ctx: AudioContext, tone: ToneName): AudioBuffer {
  const rate = ctx.sampleRate;
  const seconds = tone === "bass" ? 0.3 : 0.15;
  const n = Math.floor(rate * seconds);
  const buffer = ctx.createBuffer(1, n, rate);
  const data = buffer.getChannelData(0);
  // Small deterministic noise source so the samples need no asset files.
  let noiseState = 0x9e3779b9 >>> 0;
  const noise = () => {
    noiseState = (noiseState * 1664525 + 1013904223) >>> 0;
    return noiseState / 0x100000000 - 0.5;
  };
  for (let i = 0; i < n; i++) {
    const t = i / rate;
    const env = Math.exp(-t / (tone === "bass" ? 0.08 : 0.03));
    let s: number;
    if (tone === "bass") {
      s = Math.sin(2 * Math.PI * (80 - 100 * t) * t);
    } else if (tone === "slap") {
      s = 0.7 * noise() + 0.5 * Math.sin(2 * Math.PI * 190 * t);
    } else {
      s =
        0.8 * noise() +
        0.2 * Math.sin(2 * Math.PI * 4200 * t) +
        0.2 * Math.sin(2 * Math.PI * 5600 * t);
    }
    data[i] = s * env;
  }
  return buffer;
}

export class SamplePlayer {
  private readonly ctx: AudioContext | null;
  private readonly samples = new Map<ToneName, AudioBuffer>();

  constructor(ctxFactory?: () => AudioContext) {
    let ctx: AudioContext | null = null;
    try {
      const make =
        ctxFactory ??
        (typeof AudioContext !== "undefined" ? () => new AudioContext() : null);
      ctx = make ? make() : null;
    } catch {
      ctx = null;
    }
    this.ctx = ctx;
    if (ctx) {
      for (const tone of ["bass", "slap", "jingle"] as const) {
        this.samples.set(tone, synthesize(ctx, tone));
      }
    }
  }

  get available(): boolean {
    return this.ctx !== null;
  }

  play(event: SoundEventPayload): void {
    if (!this.ctx) return;
    const buffer = this.samples.get(event.tone as ToneName);
    if (!buffer) return;
    const source = this.ctx.createBufferSource();
    source.buffer = buffer;
    const gain = this.ctx.createGain();
    gain.gain.value = Math.max(0, Math.min(1, event.intensity));
    source.connect(gain);
    gain.connect(this.ctx.destination);
    source.start();
  }
}
