use crate::engine::Board;
use crate::reduction::{ColumnRole, Layout};

/// `#`/`.` grid, top row first. Boards whose dimensions match a reduction
/// layout get a ruler line: `|` separator, `b` bucket interior, `f` fill column.
pub fn render_board(board: &Board) -> String {
    let mut out = String::with_capacity((board.width() + 1) * (board.height() + 1));
    for r in (0..board.height()).rev() {
        out.extend((0..board.width()).map(|c| if board.is_filled(c, r) { '#' } else { '.' }));
        out.push('\n');
    }
    if let Some(layout) = Layout::infer(board.width(), board.height()) {
        out.push_str(&ruler(&layout));
        out.push('\n');
    }
    out
}

pub fn ruler(layout: &Layout) -> String {
    (0..layout.width())
        .map(|c| match layout.role(c) {
            ColumnRole::Separator => '|',
            ColumnRole::Bucket(_) => 'b',
            ColumnRole::Fill => 'f',
        })
        .collect()
}
