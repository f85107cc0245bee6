use std::fs;
use std::io::Write;
use std::path::Path;

use crate::Failure;

fn parent_of(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Fail early if `path` cannot be created because its directory is missing.
pub fn check_writable(path: &Path) -> Result<(), Failure> {
    let dir = parent_of(path);
    if !dir.is_dir() {
        return Err(Failure::Invalid(format!("output directory {} does not exist", dir.display())));
    }
    if path.is_dir() {
        return Err(Failure::Invalid(format!("output path {} is a directory", path.display())));
    }
    Ok(())
}

/// Write via a temporary file in the same directory, then rename over `path`,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Runtime(format!("writing {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(parent_of(path)).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    // Temporary files are created owner-only; outputs should not be.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644)).map_err(io)?;
    }
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Input files come from flags, so an unreadable one is a usage error.
pub fn read_to_string(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn open(path: &Path) -> Result<fs::File, Failure> {
    fs::File::open(path).map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))
}
