// Display formatting only. Statistics arrive fully computed from the hub;
// the client multiplies by 100 and pads, nothing more.

export function formatPercent(value: number | null): string {
  if (value === null) return 'n/a';
  return `${(value * 100).toFixed(2)}%`;
}

export function formatCount(part: number, total: number): string {
  return `${part}/${total}`;
}

export function formatPair(pair: [string, string]): string {
  return `${pair[0]} × ${pair[1]}`;
}
