//! An independent chess rules oracle for cross-checking the production
//! engine.
//!
//! Everything here re-derives the rules from first principles: moves are
//! found by scanning every (from, to) square pair and testing movement
//! geometry with plain file/rank arithmetic, attacks are found by iterating
//! over the attacker's pieces (the production engine radiates outward from
//! the attacked square instead), and the position is a bare struct with no
//! shared code paths into `claimcheck::chess::movegen`. Slow on purpose;
//! its only job is to disagree loudly if the fast engine is wrong.

#![allow(dead_code)] // each integration test binary uses a different subset

use claimcheck::chess::{BoardState, Color, Move, PieceKind, Square};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimPos {
    pub cells: [Option<(Color, PieceKind)>; 64],
    pub white_to_move: bool,
    /// [white kingside, white queenside, black kingside, black queenside]
    pub castle: [bool; 4],
    pub ep: Option<usize>,
}

pub fn sim_from_board(board: &BoardState) -> SimPos {
    let mut cells = [None; 64];
    for sq in Square::all() {
        if let Some(p) = board.piece_at(sq) {
            cells[sq.index()] = Some((p.color, p.kind));
        }
    }
    let c = board.castling();
    SimPos {
        cells,
        white_to_move: board.side_to_move() == Color::White,
        castle: [c.white_kingside, c.white_queenside, c.black_kingside, c.black_queenside],
        ep: board.en_passant().map(|s| s.index()),
    }
}

fn file(i: usize) -> i32 {
    (i % 8) as i32
}

fn rank(i: usize) -> i32 {
    (i / 8) as i32
}

fn is_white(color: Color) -> bool {
    color == Color::White
}

/// Does the movement shape fit the piece, treating the move as a capture or
/// not? Board occupancy is NOT consulted here (except implicitly via the
/// `as_capture` flag for pawns); emptiness and path checks happen elsewhere.
fn geometry_ok(kind: PieceKind, color: Color, from: usize, to: usize, as_capture: bool) -> bool {
    let df = file(to) - file(from);
    let dr = rank(to) - rank(from);
    if df == 0 && dr == 0 {
        return false;
    }
    match kind {
        PieceKind::Knight => (df.abs() == 1 && dr.abs() == 2) || (df.abs() == 2 && dr.abs() == 1),
        PieceKind::King => df.abs() <= 1 && dr.abs() <= 1,
        PieceKind::Rook => df == 0 || dr == 0,
        PieceKind::Bishop => df.abs() == dr.abs(),
        PieceKind::Queen => df == 0 || dr == 0 || df.abs() == dr.abs(),
        PieceKind::Pawn => {
            let fwd = if is_white(color) { 1 } else { -1 };
            if as_capture {
                df.abs() == 1 && dr == fwd
            } else {
                let start = if is_white(color) { 1 } else { 6 };
                df == 0 && (dr == fwd || (dr == 2 * fwd && rank(from) == start))
            }
        }
    }
}

/// Squares strictly between `from` and `to` are all empty. Only meaningful
/// for straight or diagonal lines.
fn path_clear(cells: &[Option<(Color, PieceKind)>; 64], from: usize, to: usize) -> bool {
    let df = (file(to) - file(from)).signum();
    let dr = (rank(to) - rank(from)).signum();
    let mut f = file(from) + df;
    let mut r = rank(from) + dr;
    while (f, r) != (file(to), rank(to)) {
        if cells[(r * 8 + f) as usize].is_some() {
            return false;
        }
        f += df;
        r += dr;
    }
    true
}

fn needs_path(kind: PieceKind) -> bool {
    matches!(kind, PieceKind::Rook | PieceKind::Bishop | PieceKind::Queen)
}

/// Is `target` attacked by any piece of the given side? Found by iterating
/// the attacker's pieces and asking whether each could capture on `target`.
pub fn sim_attacked(pos: &SimPos, by_white: bool, target: usize) -> bool {
    (0..64).any(|i| {
        let Some((color, kind)) = pos.cells[i] else { return false };
        if is_white(color) != by_white || i == target {
            return false;
        }
        geometry_ok(kind, color, i, target, true)
            && (!needs_path(kind) || path_clear(&pos.cells, i, target))
    })
}

fn king_of(pos: &SimPos, white: bool) -> usize {
    (0..64)
        .find(|&i| {
            pos.cells[i] == Some((
                if white { Color::White } else { Color::Black },
                PieceKind::King,
            ))
        })
        .expect("oracle position has both kings")
}

pub fn sim_in_check(pos: &SimPos, white: bool) -> bool {
    sim_attacked(pos, !white, king_of(pos, white))
}

/// Apply a candidate move without legality checking, handling en-passant
/// victims, the castling rook hop, flag lapses, and the new en-passant
/// square.
pub fn sim_apply(pos: &SimPos, from: usize, to: usize, promo: Option<PieceKind>) -> SimPos {
    let mut next = pos.clone();
    let (color, kind) = pos.cells[from].expect("sim_apply from an occupied square");

    next.cells[from] = None;
    next.cells[to] = Some((color, promo.unwrap_or(kind)));

    if kind == PieceKind::Pawn && pos.ep == Some(to) {
        let victim = if is_white(color) { to - 8 } else { to + 8 };
        next.cells[victim] = None;
    }

    if kind == PieceKind::King && (file(to) - file(from)).abs() == 2 {
        let home = rank(from) as usize * 8;
        if file(to) == 6 {
            next.cells[home + 5] = next.cells[home + 7].take();
        } else {
            next.cells[home + 3] = next.cells[home].take();
        }
    }

    if kind == PieceKind::King {
        if is_white(color) {
            next.castle[0] = false;
            next.castle[1] = false;
        } else {
            next.castle[2] = false;
            next.castle[3] = false;
        }
    }
    for (corner, flag) in [(7usize, 0usize), (0, 1), (63, 2), (56, 3)] {
        if from == corner || to == corner {
            next.castle[flag] = false;
        }
    }

    next.ep = None;
    if kind == PieceKind::Pawn && (rank(to) - rank(from)).abs() == 2 {
        next.ep = Some(((rank(from) + rank(to)) / 2 * 8 + file(from)) as usize);
    }

    next.white_to_move = !pos.white_to_move;
    next
}

/// All legal moves, by exhaustive candidate scan: every from-square times
/// every to-square times every promotion choice, kept if the shape fits,
/// the path is clear, and the mover's king is safe afterwards.
pub fn sim_legal_moves(pos: &SimPos) -> Vec<(usize, usize, Option<PieceKind>)> {
    let mover_white = pos.white_to_move;
    let mut out = Vec::new();

    for from in 0..64 {
        let Some((color, kind)) = pos.cells[from] else { continue };
        if is_white(color) != mover_white {
            continue;
        }
        for to in 0..64 {
            if to == from {
                continue;
            }
            if let Some((c, _)) = pos.cells[to] {
                if is_white(c) == mover_white {
                    continue;
                }
            }
            let target_enemy = pos.cells[to].is_some();
            let is_ep = kind == PieceKind::Pawn && pos.ep == Some(to);
            let as_capture = target_enemy || is_ep;

            if !geometry_ok(kind, color, from, to, as_capture) {
                continue;
            }
            if kind == PieceKind::Pawn && !as_capture {
                // Pushes need empty squares all the way.
                if target_enemy {
                    continue;
                }
                if (rank(to) - rank(from)).abs() == 2 {
                    let mid = ((rank(from) + rank(to)) / 2 * 8 + file(from)) as usize;
                    if pos.cells[mid].is_some() {
                        continue;
                    }
                }
            }
            if needs_path(kind) && !path_clear(&pos.cells, from, to) {
                continue;
            }

            let last_rank = if mover_white { 7 } else { 0 };
            let promotions: &[Option<PieceKind>] =
                if kind == PieceKind::Pawn && rank(to) == last_rank {
                    &[
                        Some(PieceKind::Queen),
                        Some(PieceKind::Rook),
                        Some(PieceKind::Bishop),
                        Some(PieceKind::Knight),
                    ]
                } else {
                    &[None]
                };
            for &promo in promotions {
                let next = sim_apply(pos, from, to, promo);
                if !sim_in_check(&next, mover_white) {
                    out.push((from, to, promo));
                }
            }
        }

        // Castling: king slides two files from its home square.
        if kind == PieceKind::King {
            let home = if mover_white { 4 } else { 60 };
            if from != home || sim_in_check(pos, mover_white) {
                continue;
            }
            let base = home - 4; // a-file square of the home rank
            let tries = [
                (pos.castle[if mover_white { 0 } else { 2 }], home + 2, vec![home + 1, home + 2], home + 1),
                (pos.castle[if mover_white { 1 } else { 3 }], home - 2, vec![home - 1, home - 2, base + 1], home - 1),
            ];
            for (allowed, to, empties, pass) in tries {
                if !allowed || empties.iter().any(|&i| pos.cells[i].is_some()) {
                    continue;
                }
                if sim_attacked(pos, !mover_white, pass) {
                    continue;
                }
                let next = sim_apply(pos, from, to, None);
                if !sim_in_check(&next, mover_white) {
                    out.push((from, to, None));
                }
            }
        }
    }
    out
}

pub fn sim_perft(pos: &SimPos, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = sim_legal_moves(pos);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves
        .iter()
        .map(|&(from, to, promo)| sim_perft(&sim_apply(pos, from, to, promo), depth - 1))
        .sum()
}

/// Production moves for a board, as (from, to, promo) index triples, sorted.
pub fn production_moves_sorted(board: &BoardState) -> Vec<(usize, usize, Option<PieceKind>)> {
    let mut moves: Vec<_> = claimcheck::chess::legal_moves(board)
        .into_iter()
        .map(|m| (m.from.index(), m.to.index(), m.promotion))
        .collect();
    moves.sort();
    moves
}

pub fn sim_moves_sorted(pos: &SimPos) -> Vec<(usize, usize, Option<PieceKind>)> {
    let mut moves = sim_legal_moves(pos);
    moves.sort();
    moves
}

/// Can the side to move checkmate the opponent within `k` of its own moves,
/// against best defense?
pub fn sim_mate_in(pos: &SimPos, k: u32) -> bool {
    if k == 0 {
        return false;
    }
    let mover_white = pos.white_to_move;
    for (from, to, promo) in sim_legal_moves(pos) {
        let next = sim_apply(pos, from, to, promo);
        let replies = sim_legal_moves(&next);
        if replies.is_empty() {
            if sim_in_check(&next, !mover_white) {
                return true; // checkmate delivered
            }
            continue; // stalemate helps the defender
        }
        if k > 1
            && replies
                .iter()
                .all(|&(f, t, p)| sim_mate_in(&sim_apply(&next, f, t, p), k - 1))
        {
            return true;
        }
    }
    false
}

/// Can the side to move capture an enemy piece of `kind` with one legal
/// move? En-passant counts as capturing a pawn.
pub fn sim_can_capture_kind(pos: &SimPos, kind: PieceKind) -> bool {
    sim_legal_moves(pos).iter().any(|&(from, to, _)| {
        if let Some((c, k)) = pos.cells[to] {
            return is_white(c) != pos.white_to_move && k == kind;
        }
        // Only a pawn landing on the en-passant square is a capture; any
        // other piece moving there just occupies an empty square.
        kind == PieceKind::Pawn
            && pos.ep == Some(to)
            && matches!(pos.cells[from], Some((_, PieceKind::Pawn)))
            && matches!(
                pos.cells[if pos.white_to_move { to - 8 } else { to + 8 }],
                Some((_, PieceKind::Pawn))
            )
    })
}

/// Convert an oracle move triple to a production `Move` for replaying.
pub fn triple_to_move(triple: (usize, usize, Option<PieceKind>)) -> Move {
    let (from, to, promo) = triple;
    let from = Square::from_index(from as u8).unwrap();
    let to = Square::from_index(to as u8).unwrap();
    match promo {
        Some(kind) => Move::promoting(from, to, kind),
        None => Move::new(from, to),
    }
}

// ---------------------------------------------------------------------------
// Scripted HTTP endpoint
// ---------------------------------------------------------------------------

pub mod mock {
    //! A minimal scripted HTTP/1.1 server speaking the chat-completions
    //! response shape, for exercising the client and runner without a
    //! network. It answers requests strictly in arrival order.

    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::thread::{self, JoinHandle};

    pub struct Reply {
        pub status: u16,
        pub body: String,
    }

    impl Reply {
        /// A 200 reply carrying `text` as the assistant's message.
        pub fn completion(text: &str) -> Reply {
            let body = serde_json::json!({
                "id": "chatcmpl-scripted",
                "object": "chat.completion",
                "choices": [{
                    "index": 0,
                    "message": { "role": "assistant", "content": text },
                    "finish_reason": "stop"
                }]
            })
            .to_string();
            Reply { status: 200, body }
        }

        /// A reply with an arbitrary status and verbatim body.
        pub fn raw(status: u16, body: &str) -> Reply {
            Reply { status, body: body.to_string() }
        }
    }

    /// Serve exactly `replies.len()` requests, one reply per request in
    /// arrival order, then stop. Returns the base URL to configure a client
    /// with and a handle yielding the raw request bodies that were received.
    pub fn serve_script(replies: Vec<Reply>) -> (String, JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind loopback");
        let base_url = format!("http://{}/v1", listener.local_addr().expect("local addr"));
        let handle = thread::spawn(move || {
            let mut seen = Vec::with_capacity(replies.len());
            for reply in replies {
                let (stream, _) = listener.accept().expect("accept connection");
                let mut reader = BufReader::new(stream);
                let mut request_line = String::new();
                reader.read_line(&mut request_line).expect("request line");
                let mut content_length = 0usize;
                loop {
                    let mut header = String::new();
                    reader.read_line(&mut header).expect("header line");
                    let header = header.trim_end();
                    if header.is_empty() {
                        break;
                    }
                    if let Some((name, value)) = header.split_once(':') {
                        if name.eq_ignore_ascii_case("content-length") {
                            content_length = value.trim().parse().unwrap_or(0);
                        }
                    }
                }
                let mut body = vec![0u8; content_length];
                reader.read_exact(&mut body).expect("request body");
                seen.push(String::from_utf8_lossy(&body).into_owned());
                let reason = match reply.status {
                    200 => "OK",
                    401 => "Unauthorized",
                    403 => "Forbidden",
                    404 => "Not Found",
                    408 => "Request Timeout",
                    429 => "Too Many Requests",
                    500 => "Internal Server Error",
                    503 => "Service Unavailable",
                    _ => "Status",
                };
                let response = format!(
                    "HTTP/1.1 {} {}\r\ncontent-type: application/json\r\n\
                     content-length: {}\r\nconnection: close\r\n\r\n{}",
                    reply.status,
                    reason,
                    reply.body.len(),
                    reply.body
                );
                let mut stream = reader.into_inner();
                stream.write_all(response.as_bytes()).expect("write response");
                stream.flush().expect("flush response");
            }
            seen
        });
        (base_url, handle)
    }
}
