use std::net::SocketAddr;
use std::sync::Arc;

use alnmatch_service::dig;
use alnmatch_service::server::{serve_registry, Config, Registry, CLIENT_HEADER};

async fn start() -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve_registry(listener, Arc::new(Registry::new(Config::default()))));
    addr
}

async fn post(addr: SocketAddr, client: Option<&str>, body: String) -> (u16, String) {
    let mut req = reqwest::Client::new().post(format!("http://{addr}/")).body(body);
    if let Some(c) = client {
        req = req.header(CLIENT_HEADER, c);
    }
    let resp = req.send().await.unwrap();
    (resp.status().as_u16(), resp.text().await.unwrap())
}

fn uri_of(body: &str) -> String {
    let start = body.find("uri=\"").unwrap() + 5;
    body[start..].split('"').next().unwrap().to_string()
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn peer_address_is_the_owner() {
    let addr = start().await;
    let (_, body) = post(addr, None, r#"<newKB shared="false"/>"#.into()).await;
    let uri = uri_of(&body);
    let tell = format!(r#"<tells uri="{uri}"><defconcept name="A"/></tells>"#);
    assert_eq!(post(addr, None, tell.clone()).await.0, 200);
    assert_eq!(post(addr, Some("elsewhere"), tell).await.0, 403);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn identifier() {
    let addr = start().await;
    let (status, body) = post(addr, None, "<getIdentifier/>".into()).await;
    assert_eq!(status, 200);
    assert!(body.starts_with("<identifier name=\"alnmatch\""));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_asks_agree() {
    let addr = start().await;
    let (_, body) = post(addr, None, "<newKB/>".into()).await;
    let uri = uri_of(&body);
    let kb = alnmatch::fixtures::reference();
    let mut tells: String = kb.tbox.axioms().iter().map(dig::render_axiom).collect();
    for ad in &kb.advertisements {
        tells.push_str(&format!(
            "<instanceof side=\"{}\"><individual name=\"{}\"/>{}</instanceof>",
            ad.side,
            ad.id,
            dig::render(&ad.concept)
        ));
    }
    assert_eq!(post(addr, None, format!("<tells uri=\"{uri}\">{tells}</tells>")).await.0, 200);

    let mut asks = String::new();
    for (i, a) in kb.advertisements.iter().enumerate() {
        for b in &kb.advertisements {
            asks.push_str(&format!(
                "<matchType id=\"m{i}-{0}\"><individual name=\"{1}\"/><individual name=\"{0}\"/></matchType>\
                 <rank id=\"p{i}-{0}\" type=\"partial\"><individual name=\"{1}\"/><individual name=\"{0}\"/></rank>",
                b.id, a.id
            ));
        }
    }
    let request = format!("<asks uri=\"{uri}\">{asks}</asks>");
    let handles: Vec<_> = (0..16)
        .map(|_| tokio::spawn(post(addr, Some("reader"), request.clone())))
        .collect();
    let mut bodies = Vec::new();
    for h in handles {
        let (status, body) = h.await.unwrap();
        assert_eq!(status, 200);
        bodies.push(body);
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
    assert!(bodies[0].contains("<matchType id=\"m1-ex3-dem\">partial</matchType>"));
}
