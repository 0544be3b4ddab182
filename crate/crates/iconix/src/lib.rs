//! IO side of the icon pipeline: PNG codecs, HTTP model clients, the
//! content-addressed artifact store, the session service and the batch
//! runner. The pure stages live in `iconix_core`.

pub mod batch;
pub mod codec;
pub mod env;
pub mod model_server;
pub mod remote;
pub mod server;
pub mod session;
pub mod stages;
pub mod store;
pub mod wire;
