//! Generates one tile per terrain kind at a few difficulty levels, prints
//! the geometric parameters and writes the stairs tile to disk.
//!
//! ```text
//! cargo run --example terrain_export -- /tmp/stairs.rghf
//! ```

use locobench::terrain::{generate, terrain_parameters, TerrainKind, TerrainSpec};

fn main() -> locobench::Result<()> {
    for kind in TerrainKind::ALL {
        for level in [1u8, 5, 10] {
            let spec = TerrainSpec::for_level(kind, level, 42);
            let field = generate(&spec)?;
            let params: Vec<String> = terrain_parameters(kind, spec.difficulty)
                .into_iter()
                .map(|(k, v)| format!("{k}={v:.3}"))
                .collect();
            println!(
                "{:<12} L{:<2} max|h|={:.3} m  {}",
                kind.as_str(),
                level,
                field.max_abs_height(),
                params.join(" ")
            );
        }
    }

    let out = std::env::args().nth(1).unwrap_or_else(|| "stairs_up_d0.4.rghf".into());
    let stairs = generate(&TerrainSpec::tile(TerrainKind::StairsUp, 0.4, 0))?;
    stairs.write_binary(std::fs::File::create(&out)?)?;
    let (rows, cols) = stairs.dims();
    println!("wrote {rows}x{cols} heightfield to {out}");
    Ok(())
}
