//! Symbolic simulation of timed-stream components with a Dolev-Yao
//! adversary.
//!
//! Terms are built from atoms with free encryption and signature
//! constructors ([`term`]), carried over discrete-time channels
//! ([`stream`]) between declarative components ([`component`]). A
//! component's knowledge base ([`knowledge`]) collects what it received and
//! decides which expressions it can derive. [`tls`] holds the TLS handshake
//! case study and [`cli`] the command-line front end.

pub mod cli;
pub mod component;
pub mod knowledge;
pub mod message;
pub mod scenario;
pub mod stream;
pub mod term;
pub mod text;
pub mod tls;
