//! The evaluation environment and how it is detected.
//!
//! Precedence for every field is flag override, then environment variable
//! (browser only), then host probe.

use std::fmt;
use std::process::Command;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::version::{parse_version, Version, VersionError};

/// Environment variable consulted for the browser when no flag is given.
pub const BROWSER_ENV_VAR: &str = "ENVSAN_BROWSER";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvironmentError {
    #[error("unknown operating system `{0}`")]
    UnknownOs(String),
    #[error("unknown browser `{0}`")]
    UnknownBrowser(String),
    #[error(transparent)]
    InvalidVersion(#[from] VersionError),
    #[error("could not determine the Node.js version: {0}")]
    RuntimeProbeFailed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Os {
    Linux,
    Darwin,
    Win32,
}

impl Os {
    pub const ALL: [Os; 3] = [Os::Linux, Os::Darwin, Os::Win32];

    pub fn as_str(self) -> &'static str {
        match self {
            Os::Linux => "linux",
            Os::Darwin => "darwin",
            Os::Win32 => "win32",
        }
    }
}

/// Maps platform identifiers and CI runner labels onto the canonical token.
pub fn normalize_os(raw: &str) -> Result<Os, EnvironmentError> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "win32" | "windows" | "windows-latest" => Ok(Os::Win32),
        "darwin" | "macos" | "osx" | "macos-latest" => Ok(Os::Darwin),
        "linux" | "ubuntu" | "ubuntu-latest" => Ok(Os::Linux),
        _ => Err(EnvironmentError::UnknownOs(raw.to_string())),
    }
}

impl FromStr for Os {
    type Err = EnvironmentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_os(s)
    }
}

impl fmt::Display for Os {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Browser {
    Chrome,
    Firefox,
    Safari,
    Edge,
    /// Nothing supplied or detected. Matches no browser condition.
    Unknown,
}

impl Browser {
    pub fn as_str(self) -> &'static str {
        match self {
            Browser::Chrome => "chrome",
            Browser::Firefox => "firefox",
            Browser::Safari => "safari",
            Browser::Edge => "edge",
            Browser::Unknown => "unknown",
        }
    }
}

/// Maps a browser name or common alias onto the canonical token. `unknown`
/// itself is accepted so serialized environments round-trip.
pub fn normalize_browser(raw: &str) -> Result<Browser, EnvironmentError> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "chrome" | "google-chrome" | "googlechrome" | "chromium" => Ok(Browser::Chrome),
        "firefox" | "mozilla-firefox" | "ff" => Ok(Browser::Firefox),
        "safari" => Ok(Browser::Safari),
        "edge" | "msedge" | "microsoft-edge" => Ok(Browser::Edge),
        "unknown" | "" => Ok(Browser::Unknown),
        _ => Err(EnvironmentError::UnknownBrowser(raw.to_string())),
    }
}

impl FromStr for Browser {
    type Err = EnvironmentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_browser(s)
    }
}

impl fmt::Display for Browser {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

macro_rules! token_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

token_serde!(Os);
token_serde!(Browser);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Environment {
    pub os: Os,
    pub node_version: Version,
    pub browser: Browser,
}

impl Environment {
    pub fn new(os: Os, node_version: Version, browser: Browser) -> Self {
        Self {
            os,
            node_version,
            browser,
        }
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, node {}, browser {}", self.os, self.node_version, self.browser)
    }
}

/// Raw, unnormalized values supplied by the caller.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnvOverrides {
    pub os: Option<String>,
    pub node_version: Option<String>,
    pub browser: Option<String>,
}

/// Source of host facts. Swappable so detection can be tested without the
/// real platform or a Node.js install.
pub trait HostProbe {
    /// Platform identifier in `std::env::consts::OS` style.
    fn platform(&self) -> String;
    /// Raw output of `node --version`.
    fn node_version(&self) -> Result<String, String>;
    fn env_var(&self, name: &str) -> Option<String>;
}

/// Probes the machine this process runs on.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemProbe;

impl HostProbe for SystemProbe {
    fn platform(&self) -> String {
        match std::env::consts::OS {
            "macos" => "darwin".to_string(),
            "windows" => "win32".to_string(),
            other => other.to_string(),
        }
    }

    fn node_version(&self) -> Result<String, String> {
        let output = Command::new("node")
            .arg("--version")
            .output()
            .map_err(|e| format!("failed to run `node --version`: {e}"))?;
        if !output.status.success() {
            return Err(format!("`node --version` exited with {}", output.status));
        }
        Ok(String::from_utf8_lossy(&output.stdout).trim().to_string())
    }

    fn env_var(&self, name: &str) -> Option<String> {
        std::env::var(name).ok()
    }
}

/// Resolves the environment, probing the host only for fields that have no
/// override.
pub fn detect_environment(overrides: &EnvOverrides, probe: &dyn HostProbe) -> Result<Environment, EnvironmentError> {
    let os = match &overrides.os {
        Some(raw) => normalize_os(raw)?,
        None => normalize_os(&probe.platform())?,
    };
    let node_version = match &overrides.node_version {
        Some(raw) => parse_version(raw.trim())?,
        None => {
            let raw = probe.node_version().map_err(EnvironmentError::RuntimeProbeFailed)?;
            parse_version(raw.trim())?
        }
    };
    let browser = match &overrides.browser {
        Some(raw) => normalize_browser(raw)?,
        None => match probe.env_var(BROWSER_ENV_VAR) {
            Some(raw) => normalize_browser(&raw)?,
            None => Browser::Unknown,
        },
    };
    Ok(Environment::new(os, node_version, browser))
}
