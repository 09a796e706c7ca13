/** Transient notifications, bottom-right. */

export function showToast(
  container: HTMLElement,
  message: string,
  kind: "info" | "error" = "info",
  ttlMs = 4000,
): HTMLElement {
  const doc = container.ownerDocument;
  const toast = doc.createElement("div");
  toast.className = kind === "error" ? "toast toast-error" : "toast";
  toast.textContent = message;
  container.appendChild(toast);
  setTimeout(() => toast.remove(), ttlMs);
  return toast;
}
