//! The typed atomic-claim language.
//!
//! A claim is one machine-checkable assertion about a chess position or its
//! game history. Claims have a canonical text form (the grammar below) used
//! everywhere claims cross a boundary: in instance files, in model response
//! formats, and in grade reports. `render(parse(text)) == text` holds up to
//! whitespace.
//!
//! Grammar (EBNF):
//!
//! ```text
//! claim       = piece-at | side-to-move | in-check | castling-right
//!             | en-passant | material | move-legal | can-capture
//!             | mate-in | game-status | move-played | history-len ;
//! piece-at    = "piece_at(" square ", " occupant ")" ;
//! side-to-move= "side_to_move(" color ")" ;
//! in-check    = "in_check(" color ")" ;
//! castling-right = "castling_right(" color ", " wing ")" ;
//! en-passant  = "en_passant_available(" ( square | "any" ) ")" ;
//! material    = "material_count(" color ", " piece-type ", " integer ")" ;
//! move-legal  = "move_legal(" move ")" ;
//! can-capture = "can_capture_in_one(" color ", " piece-type ")" ;
//! mate-in     = "mate_in(" color ", " ( "1" | "2" ) ")" ;
//! game-status = "game_status(" status ")" ;
//! move-played = "move_was_played(" integer ", " move ")" ;
//! history-len = "history_length(" integer ")" ;
//! occupant    = "empty" | color "_" piece-type ;
//! color       = "white" | "black" ;
//! piece-type  = "pawn" | "knight" | "bishop" | "rook" | "queen" | "king" ;
//! wing        = "kingside" | "queenside" ;
//! status      = "ongoing" | "checkmate" | "stalemate" | "draw_rule" ;
//! square      = file rank ;            (* "a1" .. "h8" *)
//! move        = square square [ promotion-piece ] ;   (* "e2e4", "e7e8q" *)
//! promotion-piece = "q" | "r" | "b" | "n" ;
//! integer     = digit { digit } ;
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chess::{CastleSide, Color, Move, Piece, PieceKind, Square};

/// Terminal game-status values a claim can assert. `DrawRule` means a
/// rule-based draw is in force or claimable: the halfmove clock has reached
/// 100 (fifty-move rule) or the current position has occurred at least three
/// times. Unlike the other three it can hold while the game is `Ongoing`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameStatusKind {
    Ongoing,
    Checkmate,
    Stalemate,
    DrawRule,
}

impl GameStatusKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GameStatusKind::Ongoing => "ongoing",
            GameStatusKind::Checkmate => "checkmate",
            GameStatusKind::Stalemate => "stalemate",
            GameStatusKind::DrawRule => "draw_rule",
        }
    }
}

/// The twelve claim kinds. Everything a generated query asks, and everything
/// a graded response may assert, bottoms out in one of these.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ClaimKind {
    /// The square holds exactly this piece (or nothing, for `None`).
    PieceAt { square: Square, occupant: Option<Piece> },
    SideToMove { color: Color },
    InCheck { color: Color },
    CastlingRight { color: Color, side: CastleSide },
    /// An en-passant target square is recorded: this exact square, or any
    /// square at all for `None`.
    EnPassantAvailable { square: Option<Square> },
    MaterialCount { color: Color, piece: PieceKind, count: u32 },
    /// The move is legal for the side to move.
    MoveLegal { mv: Move },
    /// The named side, moving now, could capture an enemy piece of this type.
    CanCaptureInOne { color: Color, target: PieceKind },
    /// The named side, moving now, can force checkmate within k moves.
    MateInK { color: Color, k: u32 },
    GameStatus { status: GameStatusKind },
    /// The game's ply-th half-move (1-based) was exactly this move.
    MoveWasPlayed { ply: u32, mv: Move },
    HistoryLength { len: u32 },
}

/// One atomic claim. Its identity is its canonical text, which [`fmt::Display`]
/// renders and [`FromStr`] parses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomicClaim {
    pub kind: ClaimKind,
}

impl AtomicClaim {
    pub fn new(kind: ClaimKind) -> AtomicClaim {
        AtomicClaim { kind }
    }

    /// Canonical identifier: the rendered claim text.
    pub fn id(&self) -> String {
        self.to_string()
    }

    /// Does evaluating this claim require the game history (not just the
    /// position)? `GameStatus(DrawRule)` is excluded: it prefers history but
    /// can sometimes be settled by the halfmove clock alone.
    pub fn requires_history(&self) -> bool {
        matches!(self.kind, ClaimKind::MoveWasPlayed { .. } | ClaimKind::HistoryLength { .. })
    }
}

impl fmt::Display for AtomicClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ClaimKind::PieceAt { square, occupant } => {
                let occ = match occupant {
                    Some(p) => format!("{}_{}", p.color, p.kind),
                    None => "empty".to_string(),
                };
                write!(f, "piece_at({square}, {occ})")
            }
            ClaimKind::SideToMove { color } => write!(f, "side_to_move({color})"),
            ClaimKind::InCheck { color } => write!(f, "in_check({color})"),
            ClaimKind::CastlingRight { color, side } => {
                let wing = match side {
                    CastleSide::Kingside => "kingside",
                    CastleSide::Queenside => "queenside",
                };
                write!(f, "castling_right({color}, {wing})")
            }
            ClaimKind::EnPassantAvailable { square } => match square {
                Some(sq) => write!(f, "en_passant_available({sq})"),
                None => write!(f, "en_passant_available(any)"),
            },
            ClaimKind::MaterialCount { color, piece, count } => {
                write!(f, "material_count({color}, {piece}, {count})")
            }
            ClaimKind::MoveLegal { mv } => write!(f, "move_legal({mv})"),
            ClaimKind::CanCaptureInOne { color, target } => {
                write!(f, "can_capture_in_one({color}, {target})")
            }
            ClaimKind::MateInK { color, k } => write!(f, "mate_in({color}, {k})"),
            ClaimKind::GameStatus { status } => write!(f, "game_status({})", status.as_str()),
            ClaimKind::MoveWasPlayed { ply, mv } => write!(f, "move_was_played({ply}, {mv})"),
            ClaimKind::HistoryLength { len } => write!(f, "history_length({len})"),
        }
    }
}

/// A claim-text parse failure, locating the problem by byte offset in the
/// input.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("claim syntax error at byte {position}: {message}")]
pub struct ClaimParseError {
    pub position: usize,
    pub message: String,
}

impl ClaimParseError {
    fn new(position: usize, message: impl Into<String>) -> ClaimParseError {
        ClaimParseError { position, message: message.into() }
    }
}

/// An argument together with its byte offset in the original input.
struct Arg<'a> {
    text: &'a str,
    position: usize,
}

impl<'a> Arg<'a> {
    fn err(&self, message: impl Into<String>) -> ClaimParseError {
        ClaimParseError::new(self.position, message.into())
    }

    fn color(&self) -> Result<Color, ClaimParseError> {
        self.text
            .parse()
            .map_err(|_| self.err(format!("expected a color (white|black), found {:?}", self.text)))
    }

    fn square(&self) -> Result<Square, ClaimParseError> {
        self.text
            .parse()
            .map_err(|_| self.err(format!("expected a square (a1..h8), found {:?}", self.text)))
    }

    fn piece_kind(&self) -> Result<PieceKind, ClaimParseError> {
        self.text.parse().map_err(|_| {
            self.err(format!(
                "expected a piece type (pawn|knight|bishop|rook|queen|king), found {:?}",
                self.text
            ))
        })
    }

    fn occupant(&self) -> Result<Option<Piece>, ClaimParseError> {
        if self.text == "empty" {
            return Ok(None);
        }
        let (color_str, kind_str) = self.text.split_once('_').ok_or_else(|| {
            self.err(format!("expected \"empty\" or color_piece (e.g. white_pawn), found {:?}", self.text))
        })?;
        let color: Color = color_str
            .parse()
            .map_err(|_| self.err(format!("unknown color {color_str:?} in occupant")))?;
        let kind: PieceKind = kind_str
            .parse()
            .map_err(|_| self.err(format!("unknown piece type {kind_str:?} in occupant")))?;
        Ok(Some(Piece::new(color, kind)))
    }

    fn wing(&self) -> Result<CastleSide, ClaimParseError> {
        match self.text {
            "kingside" => Ok(CastleSide::Kingside),
            "queenside" => Ok(CastleSide::Queenside),
            other => Err(self.err(format!("expected kingside or queenside, found {other:?}"))),
        }
    }

    fn coordinate_move(&self) -> Result<Move, ClaimParseError> {
        self.text.parse().map_err(|_| {
            self.err(format!("expected a coordinate move (e.g. e2e4, e7e8q), found {:?}", self.text))
        })
    }

    fn integer(&self) -> Result<u32, ClaimParseError> {
        self.text
            .parse()
            .map_err(|_| self.err(format!("expected a non-negative integer, found {:?}", self.text)))
    }

    fn status(&self) -> Result<GameStatusKind, ClaimParseError> {
        match self.text {
            "ongoing" => Ok(GameStatusKind::Ongoing),
            "checkmate" => Ok(GameStatusKind::Checkmate),
            "stalemate" => Ok(GameStatusKind::Stalemate),
            "draw_rule" => Ok(GameStatusKind::DrawRule),
            other => Err(self.err(format!(
                "expected a status (ongoing|checkmate|stalemate|draw_rule), found {other:?}"
            ))),
        }
    }
}

/// Parse one claim in canonical form. Whitespace around the predicate name
/// and arguments is tolerated; everything else is strict.
pub fn parse_claim(text: &str) -> Result<AtomicClaim, ClaimParseError> {
    let open = text
        .find('(')
        .ok_or_else(|| ClaimParseError::new(text.len(), "expected '(' after predicate name"))?;
    let name = text[..open].trim();
    let name_pos = text.len() - text.trim_start().len();

    let after = &text[open + 1..];
    let close_rel = after
        .rfind(')')
        .ok_or_else(|| ClaimParseError::new(text.len(), "expected closing ')'"))?;
    if !after[close_rel + 1..].trim().is_empty() {
        return Err(ClaimParseError::new(
            open + 1 + close_rel + 1,
            "unexpected trailing characters after ')'",
        ));
    }
    let inner = &after[..close_rel];

    // Split arguments on commas, remembering each argument's offset.
    let mut args: Vec<Arg> = Vec::new();
    let mut start = 0;
    for piece in inner.split(',') {
        let trimmed = piece.trim();
        let lead = piece.len() - piece.trim_start().len();
        args.push(Arg { text: trimmed, position: open + 1 + start + lead });
        start += piece.len() + 1;
    }
    if args.len() == 1 && args[0].text.is_empty() {
        args.clear();
    }

    let arity = |want: usize| -> Result<(), ClaimParseError> {
        if args.len() == want {
            Ok(())
        } else {
            Err(ClaimParseError::new(
                open,
                format!("{name} takes {want} argument(s), found {}", args.len()),
            ))
        }
    };

    let kind = match name {
        "piece_at" => {
            arity(2)?;
            ClaimKind::PieceAt { square: args[0].square()?, occupant: args[1].occupant()? }
        }
        "side_to_move" => {
            arity(1)?;
            ClaimKind::SideToMove { color: args[0].color()? }
        }
        "in_check" => {
            arity(1)?;
            ClaimKind::InCheck { color: args[0].color()? }
        }
        "castling_right" => {
            arity(2)?;
            ClaimKind::CastlingRight { color: args[0].color()?, side: args[1].wing()? }
        }
        "en_passant_available" => {
            arity(1)?;
            let square =
                if args[0].text == "any" { None } else { Some(args[0].square()?) };
            ClaimKind::EnPassantAvailable { square }
        }
        "material_count" => {
            arity(3)?;
            ClaimKind::MaterialCount {
                color: args[0].color()?,
                piece: args[1].piece_kind()?,
                count: args[2].integer()?,
            }
        }
        "move_legal" => {
            arity(1)?;
            ClaimKind::MoveLegal { mv: args[0].coordinate_move()? }
        }
        "can_capture_in_one" => {
            arity(2)?;
            ClaimKind::CanCaptureInOne { color: args[0].color()?, target: args[1].piece_kind()? }
        }
        "mate_in" => {
            arity(2)?;
            let k = args[1].integer()?;
            if !(1..=2).contains(&k) {
                return Err(args[1].err(format!("mate_in depth must be 1 or 2, found {k}")));
            }
            ClaimKind::MateInK { color: args[0].color()?, k }
        }
        "game_status" => {
            arity(1)?;
            ClaimKind::GameStatus { status: args[0].status()? }
        }
        "move_was_played" => {
            arity(2)?;
            let ply = args[0].integer()?;
            if ply == 0 {
                return Err(args[0].err("ply numbers start at 1"));
            }
            ClaimKind::MoveWasPlayed { ply, mv: args[1].coordinate_move()? }
        }
        "history_length" => {
            arity(1)?;
            ClaimKind::HistoryLength { len: args[0].integer()? }
        }
        other => {
            return Err(ClaimParseError::new(
                name_pos,
                format!("unknown claim predicate {other:?}"),
            ))
        }
    };
    Ok(AtomicClaim::new(kind))
}

impl FromStr for AtomicClaim {
    type Err = ClaimParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_claim(s)
    }
}

impl Serialize for AtomicClaim {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AtomicClaim {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
