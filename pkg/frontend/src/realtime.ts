import type { FeedbackEvent } from "./types.js";

export interface SocketLike {
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((err: unknown) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

/**
 * Feedback stream for one play session. The server replays the event log from
 * the requested cursor on connect, so reconnecting resumes without loss; the
 * seq guard drops anything already seen.
 */
export class FeedbackChannel {
  private socket: SocketLike | null = null;
  private lastSeq = -1;

  constructor(
    private readonly streamUrl: string,
    private readonly socketFactory: SocketFactory,
    private readonly onEvent: (event: FeedbackEvent) => void,
  ) {}

  get nextCursor(): number {
    return this.lastSeq + 1;
  }

  connect(cursor: number = this.nextCursor): void {
    this.close();
    const socket = this.socketFactory(`${this.streamUrl}?cursor=${cursor}`);
    socket.onmessage = (message) => {
      const event = JSON.parse(String(message.data)) as FeedbackEvent;
      if (event.seq <= this.lastSeq) return;
      this.lastSeq = event.seq;
      this.onEvent(event);
    };
    socket.onclose = () => {
      if (this.socket === socket) this.socket = null;
    };
    this.socket = socket;
  }

  /** Resume after a connection loss; already-delivered events are skipped. */
  reconnect(): void {
    this.connect(this.nextCursor);
  }

  close(): void {
    if (this.socket !== null) {
      const socket = this.socket;
      this.socket = null;
      socket.close();
    }
  }
}
