/** Keyboard-first scoring: plain digits 0-9 give their face value,
 * Shift+0 gives 10.  Anything else is not a score key. */

export interface KeyStroke {
  key: string;
  code?: string;
  shiftKey: boolean;
}

export function scoreForKey(stroke: KeyStroke): number | null {
  if (stroke.shiftKey) {
    // With shift held, layouts report ")" (or keep "0"); match on either.
    if (stroke.key === "0" || stroke.key === ")" || stroke.code === "Digit0") {
      return 10;
    }
    return null;
  }
  if (/^[0-9]$/.test(stroke.key)) {
    return parseInt(stroke.key, 10);
  }
  return null;
}

export function isValidScore(value: number): boolean {
  return Number.isInteger(value) && value >= 0 && value <= 10;
}
