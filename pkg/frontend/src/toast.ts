/** Transient error/info banner. Rejected server calls surface here and the
 * view re-fetches state, so the panels always reflect the server's truth. */

let timer: ReturnType<typeof setTimeout> | null = null;

export function toast(message: string, isError = true): void {
  let el = document.getElementById("toast");
  if (el === null) {
    el = document.createElement("div");
    el.id = "toast";
    document.body.appendChild(el);
  }
  el.textContent = message;
  el.className = isError ? "toast error" : "toast info";
  el.style.display = "block";
  if (timer !== null) clearTimeout(timer);
  timer = setTimeout(() => {
    el.style.display = "none";
  }, 4000);
}
