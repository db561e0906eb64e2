"""Protocol server: NDJSON over TCP, with a WebSocket upgrade and static
asset serving for browser clients, all on one port.

One client at a time; a second connection is refused.  Each client gets a
fresh debug session running on its own VM thread; all outgoing messages
(responses and events alike) flow through one queue so wire order equals
controller emission order.
"""

import asyncio
import base64
import hashlib
import mimetypes
from pathlib import Path

from . import protocol

WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
DEFAULT_PORT = 4711


class NdjsonTransport:
    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer

    async def recv(self):
        line = await self.reader.readline()
        if not line:
            return None
        return line.decode("utf-8", errors="replace")

    async def send(self, text):
        self.writer.write(text.encode("utf-8"))
        await self.writer.drain()

    async def close(self):
        self.writer.close()


class WebSocketTransport:
    """Minimal RFC 6455 server side: text frames, ping/pong, close."""

    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer

    async def recv(self):
        buffer = b""
        while True:
            try:
                head = await self.reader.readexactly(2)
            except (asyncio.IncompleteReadError, ConnectionResetError):
                return None
            fin = head[0] & 0x80
            opcode = head[0] & 0x0F
            masked = head[1] & 0x80
            length = head[1] & 0x7F
            if length == 126:
                length = int.from_bytes(await self.reader.readexactly(2), "big")
            elif length == 127:
                length = int.from_bytes(await self.reader.readexactly(8), "big")
            mask = await self.reader.readexactly(4) if masked else None
            payload = await self.reader.readexactly(length)
            if mask:
                payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
            if opcode == 0x8:                       # close
                await self._frame(0x8, b"")
                return None
            if opcode == 0x9:                       # ping
                await self._frame(0xA, payload)
                continue
            if opcode in (0x1, 0x0):
                buffer += payload
                if fin:
                    return buffer.decode("utf-8", errors="replace")
                continue
            # ignore pongs and binary frames

    async def _frame(self, opcode, payload):
        head = bytes([0x80 | opcode])
        n = len(payload)
        if n < 126:
            head += bytes([n])
        elif n < 1 << 16:
            head += bytes([126]) + n.to_bytes(2, "big")
        else:
            head += bytes([127]) + n.to_bytes(8, "big")
        self.writer.write(head + payload)
        await self.writer.drain()

    async def send(self, text):
        await self._frame(0x1, text.encode("utf-8"))

    async def close(self):
        try:
            await self._frame(0x8, b"")
        except (ConnectionResetError, RuntimeError):
            pass
        self.writer.close()


def ws_accept_key(key):
    digest = hashlib.sha1((key + WS_GUID).encode()).digest()
    return base64.b64encode(digest).decode()


class DebugServer:
    def __init__(self, session_factory, host="127.0.0.1", port=DEFAULT_PORT,
                 ui_dir=None):
        self.session_factory = session_factory
        self.host = host
        self.port = port
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self._busy = False
        self._server = None

    async def start(self):
        self._server = await asyncio.start_server(
            self._handle_connection, self.host, self.port)
        return self._server

    async def serve_forever(self):
        await self.start()
        async with self._server:
            await self._server.serve_forever()

    async def _handle_connection(self, reader, writer):
        try:
            first = await reader.readline()
        except ConnectionResetError:
            writer.close()
            return
        if not first:
            writer.close()
            return
        if first.startswith(b"GET "):
            await self._handle_http(first, reader, writer)
            return
        transport = NdjsonTransport(reader, writer)
        await self._run_client(transport, first_line=first.decode("utf-8",
                                                                  errors="replace"))

    # --- HTTP / WebSocket entry ------------------------------------------

    async def _handle_http(self, request_line, reader, writer):
        headers = {}
        while True:
            line = await reader.readline()
            if line in (b"\r\n", b"\n", b""):
                break
            name, _, value = line.decode("latin-1").partition(":")
            headers[name.strip().lower()] = value.strip()
        if headers.get("upgrade", "").lower() == "websocket":
            key = headers.get("sec-websocket-key", "")
            writer.write(
                b"HTTP/1.1 101 Switching Protocols\r\n"
                b"Upgrade: websocket\r\n"
                b"Connection: Upgrade\r\n"
                b"Sec-WebSocket-Accept: " + ws_accept_key(key).encode() + b"\r\n\r\n")
            await writer.drain()
            await self._run_client(WebSocketTransport(reader, writer))
            return
        await self._serve_static(request_line, writer)

    async def _serve_static(self, request_line, writer):
        path = request_line.split()[1].decode("latin-1").split("?")[0]
        if path == "/":
            path = "/index.html"
        body = b"not found"
        status = b"404 Not Found"
        ctype = "text/plain"
        if self.ui_dir is not None:
            target = (self.ui_dir / path.lstrip("/")).resolve()
            if str(target).startswith(str(self.ui_dir.resolve())) and target.is_file():
                body = target.read_bytes()
                status = b"200 OK"
                ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        writer.write(b"HTTP/1.1 " + status + b"\r\n"
                     b"Content-Type: " + ctype.encode() + b"\r\n"
                     b"Content-Length: " + str(len(body)).encode() + b"\r\n"
                     b"Connection: close\r\n\r\n" + body)
        await writer.drain()
        writer.close()

    # --- protocol client --------------------------------------------------

    async def _run_client(self, transport, first_line=None):
        if self._busy:
            await transport.send(protocol.encode(protocol.error_response(
                0, "bad_state", "another client is connected")))
            await transport.close()
            return
        self._busy = True
        loop = asyncio.get_running_loop()
        outgoing = asyncio.Queue()
        session = self.session_factory()
        session.add_listener(
            lambda msg: loop.call_soon_threadsafe(outgoing.put_nowait, msg))
        thread = session.start_thread()
        writer_task = asyncio.create_task(self._pump_out(transport, outgoing))
        try:
            if first_line is not None:
                self._handle_line(session, outgoing, loop, first_line)
            while True:
                line = await transport.recv()
                if line is None:
                    break
                if not line.strip():
                    continue
                self._handle_line(session, outgoing, loop, line)
        finally:
            session.submit("stop")
            thread.join(timeout=5)
            writer_task.cancel()
            try:
                await writer_task
            except asyncio.CancelledError:
                pass
            while not outgoing.empty():
                try:
                    await transport.send(protocol.encode(outgoing.get_nowait()))
                except (ConnectionResetError, RuntimeError):
                    break
            await transport.close()
            self._busy = False

    def _handle_line(self, session, outgoing, loop, line):
        message = {}
        try:
            message = protocol.decode(line)
            req_id, command, body = protocol.validate_request(message)
        except protocol.ProtocolError as e:
            outgoing.put_nowait(protocol.error_response(
                message.get("id"), e.code, str(e)))
            return
        session.submit(command, body, id=req_id)

    async def _pump_out(self, transport, outgoing):
        while True:
            message = await outgoing.get()
            try:
                await transport.send(protocol.encode(message))
            except (ConnectionResetError, RuntimeError):
                return
