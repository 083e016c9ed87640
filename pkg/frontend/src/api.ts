import type {
  Bundle,
  CorrectionRunResource,
  DiffResource,
  EventResource,
  NodeResource,
  ParameterResource,
  PartName,
  ProjectResource,
  TreeResource,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`HTTP ${status}: ${typeof detail === "string" ? detail : JSON.stringify(detail)}`);
  }
}

async function blobBytes(blob: Blob): Promise<Uint8Array> {
  if (typeof blob.arrayBuffer === "function") {
    return new Uint8Array(await blob.arrayBuffer());
  }
  // jsdom's Blob has no arrayBuffer(); FileReader covers it.
  return await new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(new Uint8Array(reader.result as ArrayBuffer));
    reader.onerror = () => reject(reader.error);
    reader.readAsArrayBuffer(blob);
  });
}

/** Thin typed client over the engine's HTTP API. All state lives server-side;
 * the UI never transforms code locally. */
export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body instanceof FormData) {
      init.body = body;
    } else if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await fetch(this.baseUrl + path, init);
    const text = await response.text();
    const payload = text ? JSON.parse(text) : null;
    if (!response.ok) {
      throw new ApiError(response.status, payload?.detail ?? payload);
    }
    return payload as T;
  }

  createProject(filename = "index.html"): Promise<ProjectResource> {
    return this.request("POST", "/projects", { filename });
  }

  getProject(projectId: string): Promise<ProjectResource> {
    return this.request("GET", `/projects/${projectId}`);
  }

  getTree(projectId: string, filename: string): Promise<TreeResource> {
    return this.request("GET", `/projects/${projectId}/trees/${encodeURIComponent(filename)}`);
  }

  getNode(projectId: string, nodeId: string): Promise<NodeResource> {
    return this.request("GET", `/projects/${projectId}/nodes/${nodeId}`);
  }

  submitBundle(
    projectId: string,
    nodeId: string,
    parts: Partial<Record<PartName, string>>,
    sequence?: number,
  ): Promise<NodeResource> {
    return this.request("PUT", `/projects/${projectId}/nodes/${nodeId}/bundle`, {
      ...parts,
      ...(sequence === undefined ? {} : { sequence }),
    });
  }

  generate(
    projectId: string,
    nodeId: string,
    prompt: string,
    mode: "full" | "incremental",
  ): Promise<NodeResource> {
    return this.request("POST", `/projects/${projectId}/nodes/${nodeId}/generate`, {
      prompt,
      mode,
    });
  }

  fix(projectId: string, nodeId: string, errorReport: string): Promise<NodeResource> {
    return this.request("POST", `/projects/${projectId}/nodes/${nodeId}/fix`, {
      error_report: errorReport,
    });
  }

  diff(projectId: string, fromId: string, toId: string): Promise<DiffResource> {
    const query = new URLSearchParams({ from: fromId, to: toId });
    return this.request("GET", `/projects/${projectId}/diff?${query}`);
  }

  explain(
    projectId: string,
    nodeId: string,
    part: PartName,
    fromLine: number,
    toLine: number,
    text?: string,
  ): Promise<{ explanation: string }> {
    return this.request("POST", `/projects/${projectId}/nodes/${nodeId}/explain`, {
      part,
      from_line: fromLine,
      to_line: toLine,
      ...(text === undefined ? {} : { text }),
    });
  }

  optimize(projectId: string, nodeId: string, draft: string): Promise<{ prompt: string }> {
    return this.request("POST", `/projects/${projectId}/nodes/${nodeId}/optimize`, { draft });
  }

  parameters(projectId: string, nodeId: string, focus?: string): Promise<ParameterResource[]> {
    const query = focus ? `?focus=${encodeURIComponent(focus)}` : "";
    return this.request<{ parameters: ParameterResource[] }>(
      "GET",
      `/projects/${projectId}/nodes/${nodeId}/parameters${query}`,
    ).then((payload) => payload.parameters);
  }

  applyParameter(
    projectId: string,
    nodeId: string,
    parameterId: string,
    value: string,
  ): Promise<NodeResource> {
    return this.request(
      "POST",
      `/projects/${projectId}/nodes/${nodeId}/parameters/${parameterId}`,
      { value },
    );
  }

  duplicate(projectId: string, nodeId: string): Promise<NodeResource> {
    return this.request("POST", `/projects/${projectId}/nodes/${nodeId}/duplicate`);
  }

  deleteNode(projectId: string, nodeId: string): Promise<{ deleted: number }> {
    return this.request("DELETE", `/projects/${projectId}/nodes/${nodeId}`);
  }

  setActive(projectId: string, nodeId: string): Promise<ProjectResource> {
    return this.request("POST", `/projects/${projectId}/active`, { node_id: nodeId });
  }

  /** Multipart body built by hand: survives environments whose FormData/Blob
   * pair does not serialize through fetch (jsdom under node). */
  async uploadVideo(projectId: string, nodeId: string, video: Blob): Promise<{ video_ref: string }> {
    const boundary = `----animstudio-${Date.now().toString(36)}`;
    const encoder = new TextEncoder();
    const head = encoder.encode(
      `--${boundary}\r\n` +
        `Content-Disposition: form-data; name="file"; filename="capture.mp4"\r\n` +
        `Content-Type: video/mp4\r\n\r\n`,
    );
    const tail = encoder.encode(`\r\n--${boundary}--\r\n`);
    const payload = await blobBytes(video);
    const body = new Uint8Array(head.length + payload.length + tail.length);
    body.set(head, 0);
    body.set(payload, head.length);
    body.set(tail, head.length + payload.length);
    const response = await fetch(`${this.baseUrl}/projects/${projectId}/nodes/${nodeId}/video`, {
      method: "POST",
      headers: { "content-type": `multipart/form-data; boundary=${boundary}` },
      body,
    });
    const payloadJson = await response.json();
    if (!response.ok) throw new ApiError(response.status, payloadJson?.detail ?? payloadJson);
    return payloadJson as { video_ref: string };
  }

  correct(projectId: string, nodeId: string, maxRounds?: number): Promise<CorrectionRunResource> {
    return this.request("POST", `/projects/${projectId}/nodes/${nodeId}/correct`, {
      ...(maxRounds === undefined ? {} : { max_rounds: maxRounds }),
    });
  }

  events(projectId: string, since: number, timeoutSeconds: number): Promise<EventResource> {
    const query = new URLSearchParams({ since: String(since), timeout: String(timeoutSeconds) });
    return this.request("GET", `/projects/${projectId}/events?${query}`);
  }
}
