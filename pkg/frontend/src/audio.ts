/** Audible alarm cue; silent where WebAudio is unavailable. */

type AudioContextCtor = new () => AudioContext;

let context: AudioContext | null = null;

export function beep(durationMs = 400, frequencyHz = 880): void {
  const Ctor = (globalThis as { AudioContext?: AudioContextCtor }).AudioContext;
  if (!Ctor) return;
  try {
    context = context ?? new Ctor();
    const osc = context.createOscillator();
    const gain = context.createGain();
    osc.frequency.value = frequencyHz;
    osc.type = "square";
    gain.gain.value = 0.06;
    osc.connect(gain).connect(context.destination);
    osc.start();
    osc.stop(context.currentTime + durationMs / 1000);
  } catch {
    // audio is a courtesy; never let it break the console
  }
}
