// Save a byte buffer as a local file through a transient anchor element.

export function saveFile(name: string, data: Uint8Array, mime = "application/sql"): void {
  const blob = new Blob([data as BlobPart], { type: mime });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.download = name;
  anchor.href = url;
  anchor.click();
  URL.revokeObjectURL(url);
}
