/** Small element builder: el("div", {class: "x"}, child, "text"). */
export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Array<Node | string>
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

/** QuerySelector that throws instead of returning null. */
export function must<T extends Element>(root: ParentNode, selector: string): T {
  const found = root.querySelector(selector);
  if (found === null) throw new Error(`missing element: ${selector}`);
  return found as T;
}
