// Incremental server-sent-events parser. The service ends the stream after
// the terminal done/error event and replays buffered events on reconnect,
// so one pass over the response body is a complete run.

export interface SseMessage {
  event: string;
  data: string;
}

export class SseParser {
  private buffer = "";

  // Feed a decoded chunk; returns every complete event it closed off.
  push(chunk: string): SseMessage[] {
    this.buffer += chunk;
    const out: SseMessage[] = [];
    let split: number;
    while ((split = this.buffer.indexOf("\n\n")) >= 0) {
      const block = this.buffer.slice(0, split);
      this.buffer = this.buffer.slice(split + 2);
      const message = parseBlock(block);
      if (message !== null) {
        out.push(message);
      }
    }
    return out;
  }
}

function parseBlock(block: string): SseMessage | null {
  let event = "message";
  const data: string[] = [];
  for (const line of block.split("\n")) {
    if (line.startsWith("event:")) {
      event = line.slice("event:".length).trim();
    } else if (line.startsWith("data:")) {
      let value = line.slice("data:".length);
      if (value.startsWith(" ")) {
        value = value.slice(1);
      }
      data.push(value);
    }
    // Comment lines (":") and unknown fields are ignored.
  }
  if (data.length === 0) {
    return null;
  }
  return { event, data: data.join("\n") };
}
