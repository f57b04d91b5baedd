//! Regenerates the committed two-counter machine table.
//!
//! ```text
//! cargo run --example gen_machine_table > crates/core/data/two_counter_machines.txt
//! ```

use delta2_capacity::hierarchy::machines::{format_table, generate_table, TABLE_MAX_LEN, TABLE_SEED, TABLE_SIZE};

fn main() {
    print!("{}", format_table(&generate_table(TABLE_SIZE, TABLE_MAX_LEN, TABLE_SEED)));
}
