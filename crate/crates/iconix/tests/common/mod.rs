#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::Router;
use iconix::env::BackendConfig;
use iconix_core::backend::BackendKind;

/// An axum router on an ephemeral local port, served by its own runtime
/// until dropped.
pub struct Served {
    pub url: String,
    _rt: tokio::runtime::Runtime,
}

pub fn serve(router: Router) -> Served {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .unwrap();
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let addr = listener.local_addr().unwrap();
    rt.spawn(async move { axum::serve(listener, router).await.unwrap() });
    Served {
        url: format!("http://{addr}"),
        _rt: rt,
    }
}

/// A plain TCP listener that counts connections and answers each with
/// `reply` (or holds it open without answering when `reply` is `None`).
pub struct RawServer {
    pub url: String,
    pub connections: Arc<AtomicUsize>,
}

pub fn raw_server(reply: Option<&'static str>) -> RawServer {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let connections = Arc::new(AtomicUsize::new(0));
    let counter = connections.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            counter.fetch_add(1, Ordering::SeqCst);
            std::thread::spawn(move || {
                let _ = stream.set_read_timeout(Some(Duration::from_millis(500)));
                let mut buf = [0u8; 65536];
                let _ = stream.read(&mut buf);
                match reply {
                    Some(r) => {
                        let _ = stream.write_all(r.as_bytes());
                    }
                    None => std::thread::sleep(Duration::from_secs(5)),
                }
            });
        }
    });
    RawServer { url, connections }
}

/// An address nothing listens on.
pub fn dead_url() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    url
}

/// Every backend kind pointed at `url`.
pub fn all_remote(url: &str, timeout_secs: u64) -> BackendConfig {
    let vars: Vec<(String, String)> = BackendKind::ALL
        .iter()
        .map(|k| (format!("ICONIX_{}_URL", k.env_name()), url.to_string()))
        .chain([("ICONIX_TIMEOUT_SECS".to_string(), timeout_secs.to_string())])
        .collect();
    BackendConfig::from_vars(|name| vars.iter().find(|(k, _)| k == name).map(|(_, v)| v.clone())).unwrap()
}

/// Relative path → bytes for every file under `root`.
pub fn tree(root: &std::path::Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}
