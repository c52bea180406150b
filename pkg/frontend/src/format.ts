/** Display formatting helpers. */

export function formatHz(value: number | null, digits = 3): string {
  return value === null ? "--" : `${value.toFixed(digits)} Hz`;
}

export function formatMw(value: number | null): string {
  return value === null ? "--" : `${value.toFixed(1)} MW`;
}

export function formatMws(value: number | null): string {
  return value === null ? "--" : `${Math.round(value).toLocaleString("en-US")} MW·s`;
}

export function formatSeconds(value: number | null): string {
  if (value === null) return "--";
  if (value < 120) return `${value.toFixed(value < 10 ? 1 : 0)} s`;
  return `${Math.floor(value / 60)} min ${Math.round(value % 60)} s`;
}

export function formatTimestamp(iso: string | null): string {
  if (!iso) return "--";
  const date = new Date(iso);
  return isNaN(date.getTime()) ? iso : date.toISOString().replace("T", " ").slice(0, 19) + "Z";
}
