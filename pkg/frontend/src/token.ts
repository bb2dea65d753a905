// Anonymous per-browser token: random at first use, persisted in local
// storage, never derived from anything personal.

const STORAGE_KEY = "scholrec_token";

function randomToken(): string {
  const bytes = new Uint8Array(16);
  if (typeof crypto !== "undefined" && crypto.getRandomValues) {
    crypto.getRandomValues(bytes);
  } else {
    for (let i = 0; i < bytes.length; i++) {
      bytes[i] = Math.floor(Math.random() * 256);
    }
  }
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

export function userToken(storage: Storage = localStorage): string {
  try {
    const existing = storage.getItem(STORAGE_KEY);
    if (existing) return existing;
    const token = randomToken();
    storage.setItem(STORAGE_KEY, token);
    return token;
  } catch {
    // storage blocked (private mode, embeds without storage access)
    return randomToken();
  }
}
