"""Hand-written ES5 template programs for the synthetic corpus.

Each entry is ``(name, rule, source)``. Tracking templates cover cookie
access, beacons, ad slots and widgets; functional ones cover menus,
search, forms and similar page behaviour.
"""

TRACKING_TEMPLATES = [
    ("cookie_reader", "R6", r"""
var nid = "1822";
var cookieName = "co_au";
function getCookie(name) {
  var i, x, y, parts = document.cookie.split(";");
  for (i = 0; i < parts.length; i++) {
    x = parts[i].substr(0, parts[i].indexOf("="));
    y = parts[i].substr(parts[i].indexOf("=") + 1);
    x = x.replace(/^\s+|\s+$/g, "");
    if (x == name) {
      return unescape(y);
    }
  }
  return "";
}
var content = getCookie(cookieName);
"""),
    ("pixel_beacon", "R5", r"""
(function (win, doc) {
  var base = "https://px.tracker.example/p.gif";
  var params = [];
  params.push("u=" + encodeURIComponent(doc.location.href));
  params.push("r=" + encodeURIComponent(doc.referrer));
  params.push("t=" + new Date().getTime());
  params.push("sw=" + win.screen.width + "x" + win.screen.height);
  var img = new Image(1, 1);
  img.src = base + "?" + params.join("&");
  img.onload = function () {
    img.onload = null;
  };
})(window, document);
"""),
    ("analytics_queue", "R4", r"""
var _q = window._q || [];
_q.push(["setAccount", "UA-31337-2"]);
_q.push(["trackPageview"]);
(function () {
  var ga = document.createElement("script");
  ga.type = "text/javascript";
  ga.async = true;
  var proto = "https:" == document.location.protocol ? "https://ssl" : "http://www";
  ga.src = proto + ".stats.example/ga.js";
  var s = document.getElementsByTagName("script")[0];
  s.parentNode.insertBefore(ga, s);
})();
"""),
    ("visitor_id", "R6", r"""
function makeId() {
  var chars = "0123456789abcdef";
  var out = "";
  for (var i = 0; i < 32; i++) {
    out += chars.charAt(Math.floor(Math.random() * 16));
  }
  return out;
}
function setCookie(name, value, days) {
  var d = new Date();
  d.setTime(d.getTime() + days * 86400000);
  document.cookie = name + "=" + value + ";expires=" + d.toUTCString() + ";path=/";
}
var vid = makeId();
if (document.cookie.indexOf("_vid=") < 0) {
  setCookie("_vid", vid, 730);
}
"""),
    ("ad_slot", "R1", r"""
var slots = document.querySelectorAll(".ad-slot");
for (var i = 0; i < slots.length; i++) {
  var slot = slots[i];
  var size = slot.getAttribute("data-size").split("x");
  slot.style.width = size[0] + "px";
  slot.style.height = size[1] + "px";
  slot.style.marginTop = "10px";
  slot.style.marginBottom = "10px";
  var frame = document.createElement("iframe");
  frame.width = size[0];
  frame.height = size[1];
  frame.frameBorder = 0;
  frame.scrolling = "no";
  frame.src = "https://ads.example/serve?slot=" + slot.id + "&sz=" + size.join("x");
  slot.appendChild(frame);
}
"""),
    ("ad_fetch", "R2", r"""
function renderAds(list) {
  var box = document.getElementById("sponsored");
  var html = "";
  for (var k = 0; k < list.length; k++) {
    var ad = list[k];
    html += "<a href='" + ad.click + "'><img src='" + ad.img + "'></a>";
    var ping = new Image();
    ping.src = ad.impression + "&ts=" + new Date().getTime();
  }
  box.innerHTML = html;
}
var xhr = new XMLHttpRequest();
xhr.open("GET", "https://ads.example/fetch?n=3&site=" + location.hostname, true);
xhr.onreadystatechange = function () {
  if (xhr.readyState == 4 && xhr.status == 200) {
    renderAds(JSON.parse(xhr.responseText));
  }
};
xhr.send(null);
"""),
    ("social_widget", "R3", r"""
(function (d, s, id) {
  var js, fjs = d.getElementsByTagName(s)[0];
  if (d.getElementById(id)) {
    return;
  }
  js = d.createElement(s);
  js.id = id;
  js.src = "//connect.social.example/en_US/sdk.js#xfbml=1&version=v2.5";
  fjs.parentNode.insertBefore(js, fjs);
}(document, "script", "social-jssdk"));
window.likeInit = function () {
  var buttons = document.getElementsByClassName("like-button");
  for (var i = 0; i < buttons.length; i++) {
    buttons[i].setAttribute("data-href", location.href);
  }
};
"""),
    ("event_beacon", "R5", r"""
var tracker = {
  endpoint: "https://collect.example/e",
  session: null,
  send: function (name, data) {
    var payload = "ev=" + name + "&sid=" + tracker.session;
    for (var key in data) {
      payload += "&" + key + "=" + encodeURIComponent(data[key]);
    }
    if (navigator.sendBeacon) {
      navigator.sendBeacon(tracker.endpoint, payload);
    } else {
      var img = new Image();
      img.src = tracker.endpoint + "?" + payload;
    }
  }
};
tracker.session = Math.random().toString(36).substr(2, 9);
window.addEventListener("beforeunload", function () {
  tracker.send("leave", {t: new Date().getTime(), p: location.pathname});
});
"""),
    ("fingerprint", "R6", r"""
function fingerprint() {
  var parts = [];
  parts.push(navigator.userAgent);
  parts.push(navigator.language);
  parts.push(screen.colorDepth);
  parts.push(new Date().getTimezoneOffset());
  parts.push(navigator.plugins.length);
  var str = parts.join("###");
  var hash = 0;
  for (var i = 0; i < str.length; i++) {
    hash = (hash << 5) - hash + str.charCodeAt(i);
    hash = hash & hash;
  }
  return Math.abs(hash).toString(16);
}
var fp = fingerprint();
document.cookie = "_fp=" + fp + ";path=/;max-age=31536000";
"""),
    ("hidden_iframe", "R10", r"""
var ifr = document.createElement("iframe");
ifr.style.display = "none";
ifr.style.width = "0px";
ifr.style.height = "0px";
ifr.setAttribute("aria-hidden", "true");
ifr.src = "https://sync.partner.example/match?pid=4410&uid=" + (window.uid || "");
document.body.appendChild(ifr);
var partners = ["dsp1", "dsp2", "dsp3"];
for (var p = 0; p < partners.length; p++) {
  var px = new Image();
  px.src = "https://" + partners[p] + ".example/sync?src=4410";
}
"""),
    ("iframe_cookie_sync", "R11", r"""
function readAll() {
  var out = {};
  var pairs = document.cookie.split("; ");
  for (var i = 0; i < pairs.length; i++) {
    var eq = pairs[i].indexOf("=");
    if (eq > 0) {
      out[pairs[i].substring(0, eq)] = pairs[i].substring(eq + 1);
    }
  }
  return out;
}
var jar = readAll();
if (window.parent && window.parent !== window) {
  window.parent.postMessage(JSON.stringify({type: "cookies", data: jar}), "*");
}
document.cookie = "_sync=" + new Date().getTime() + "; path=/";
"""),
    ("referrer_logger", "R4", r"""
var ref = document.referrer;
var host = "";
if (ref) {
  var m = ref.match(/^https?:\/\/([^\/]+)/);
  if (m) {
    host = m[1];
  }
}
var q = "";
var idx = location.search.indexOf("utm_source=");
if (idx >= 0) {
  q = location.search.substr(idx + 11).split("&")[0];
}
var s = document.createElement("script");
s.src = "https://log.metrics.example/r.js?h=" + encodeURIComponent(host) + "&src=" + q;
document.getElementsByTagName("head")[0].appendChild(s);
"""),
]

FUNCTIONAL_TEMPLATES = [
    ("menu_toggle", "R8", r"""
var menuButton = document.getElementById("menu-toggle");
var menu = document.getElementById("main-menu");
menuButton.onclick = function (ev) {
  ev.preventDefault();
  if (menu.className.indexOf("open") >= 0) {
    menu.className = menu.className.replace(" open", "");
    menuButton.setAttribute("aria-expanded", "false");
  } else {
    menu.className += " open";
    menuButton.setAttribute("aria-expanded", "true");
  }
};
"""),
    ("search_suggest", "R7", r"""
var input = document.getElementById("search");
var list = document.getElementById("suggestions");
var timer = null;
function showSuggestions(items) {
  list.innerHTML = "";
  for (var i = 0; i < items.length && i < 8; i++) {
    var li = document.createElement("li");
    li.textContent = items[i];
    list.appendChild(li);
  }
  list.style.display = items.length ? "block" : "none";
}
input.onkeyup = function () {
  clearTimeout(timer);
  timer = setTimeout(function () {
    var req = new XMLHttpRequest();
    req.open("GET", "/api/suggest?q=" + encodeURIComponent(input.value), true);
    req.onload = function () {
      showSuggestions(JSON.parse(req.responseText));
    };
    req.send();
  }, 200);
};
"""),
    ("carousel", "R8", r"""
function Carousel(root, interval) {
  this.root = root;
  this.slides = root.querySelectorAll(".slide");
  this.current = 0;
  this.interval = interval;
}
Carousel.prototype.show = function (n) {
  this.slides[this.current].style.display = "none";
  this.current = (n + this.slides.length) % this.slides.length;
  this.slides[this.current].style.display = "block";
};
Carousel.prototype.start = function () {
  var self = this;
  setInterval(function () {
    self.show(self.current + 1);
  }, this.interval);
};
var c = new Carousel(document.getElementById("hero"), 5000);
c.start();
"""),
    ("form_validation", "R8", r"""
function validEmail(value) {
  return /^[^@\s]+@[^@\s]+\.[a-z]{2,}$/i.test(value);
}
var form = document.forms["signup"];
form.onsubmit = function () {
  var errors = [];
  if (form.name.value.length < 2) {
    errors.push("Please enter your name.");
  }
  if (!validEmail(form.email.value)) {
    errors.push("Please enter a valid email address.");
  }
  if (form.password.value.length < 8) {
    errors.push("Password must have at least 8 characters.");
  }
  var box = document.getElementById("form-errors");
  box.innerHTML = errors.join("<br>");
  return errors.length === 0;
};
"""),
    ("tabs", "R8", r"""
var tabs = document.querySelectorAll(".tabs a");
var panels = document.querySelectorAll(".tab-panel");
function activate(index) {
  for (var i = 0; i < tabs.length; i++) {
    var on = i === index;
    tabs[i].className = on ? "active" : "";
    panels[i].style.display = on ? "block" : "none";
  }
}
for (var t = 0; t < tabs.length; t++) {
  tabs[t].onclick = (function (n) {
    return function (e) {
      e.preventDefault();
      activate(n);
    };
  })(t);
}
activate(0);
"""),
    ("lazy_images", "R9", r"""
var images = [].slice.call(document.querySelectorAll("img[data-src]"));
function inView(el) {
  var rect = el.getBoundingClientRect();
  return rect.top < window.innerHeight + 200 && rect.bottom > -200;
}
function loadVisible() {
  for (var i = images.length - 1; i >= 0; i--) {
    if (inView(images[i])) {
      images[i].src = images[i].getAttribute("data-src");
      images[i].removeAttribute("data-src");
      images.splice(i, 1);
    }
  }
  if (!images.length) {
    window.removeEventListener("scroll", loadVisible);
  }
}
window.addEventListener("scroll", loadVisible);
loadVisible();
"""),
    ("accordion", "R8", r"""
var headers = document.getElementsByClassName("accordion-header");
for (var i = 0; i < headers.length; i++) {
  headers[i].addEventListener("click", function () {
    var body = this.nextElementSibling;
    var open = body.style.maxHeight;
    if (open) {
      body.style.maxHeight = null;
      this.classList.remove("expanded");
    } else {
      body.style.maxHeight = body.scrollHeight + "px";
      this.classList.add("expanded");
    }
  });
}
"""),
    ("modal_dialog", "R7", r"""
var modal = document.getElementById("login-modal");
var openers = document.querySelectorAll("[data-open-login]");
function closeModal() {
  modal.style.display = "none";
  document.body.style.overflow = "";
}
function openModal() {
  modal.style.display = "block";
  document.body.style.overflow = "hidden";
  modal.querySelector("input").focus();
}
for (var i = 0; i < openers.length; i++) {
  openers[i].onclick = openModal;
}
modal.querySelector(".close").onclick = closeModal;
window.onclick = function (event) {
  if (event.target == modal) {
    closeModal();
  }
};
"""),
    ("cart_total", "R7", r"""
function formatPrice(cents) {
  var whole = Math.floor(cents / 100);
  var rest = cents % 100;
  return "$" + whole + "." + (rest < 10 ? "0" + rest : rest);
}
function updateTotal() {
  var rows = document.querySelectorAll(".cart-row");
  var total = 0;
  for (var i = 0; i < rows.length; i++) {
    var qty = parseInt(rows[i].querySelector(".qty").value, 10) || 0;
    var price = parseInt(rows[i].getAttribute("data-price"), 10);
    total += qty * price;
    rows[i].querySelector(".line-total").textContent = formatPrice(qty * price);
  }
  document.getElementById("cart-total").textContent = formatPrice(total);
}
document.getElementById("cart").addEventListener("change", updateTotal);
updateTotal();
"""),
    ("keyboard_shortcuts", "R12", r"""
var shortcuts = {
  "/": function () {
    document.getElementById("search").focus();
  },
  "?": function () {
    document.getElementById("help").style.display = "block";
  }
};
document.onkeydown = function (e) {
  e = e || window.event;
  var tag = (e.target || e.srcElement).tagName;
  if (tag == "INPUT" || tag == "TEXTAREA") {
    return true;
  }
  var key = e.key || String.fromCharCode(e.keyCode);
  if (shortcuts.hasOwnProperty(key)) {
    shortcuts[key]();
    return false;
  }
  if (e.getModifierState && e.getModifierState("CapsLock")) {
    document.getElementById("caps-warning").style.display = "inline";
  }
  return true;
};
"""),
    ("smooth_scroll", "R8", r"""
var links = document.querySelectorAll("a[href^='#']");
function scrollToTarget(target, duration) {
  var start = window.pageYOffset;
  var end = target.getBoundingClientRect().top + start;
  var startTime = null;
  function step(ts) {
    if (!startTime) {
      startTime = ts;
    }
    var progress = Math.min((ts - startTime) / duration, 1);
    window.scrollTo(0, start + (end - start) * progress);
    if (progress < 1) {
      window.requestAnimationFrame(step);
    }
  }
  window.requestAnimationFrame(step);
}
for (var i = 0; i < links.length; i++) {
  links[i].addEventListener("click", function (e) {
    var target = document.querySelector(this.getAttribute("href"));
    if (target) {
      e.preventDefault();
      scrollToTarget(target, 400);
    }
  });
}
"""),
    ("content_loader", "R9", r"""
var container = document.getElementById("articles");
var page = 1;
var loading = false;
function appendArticles(items) {
  for (var i = 0; i < items.length; i++) {
    var item = document.createElement("article");
    var title = document.createElement("h2");
    title.textContent = items[i].title;
    item.appendChild(title);
    var summary = document.createElement("p");
    summary.textContent = items[i].summary;
    item.appendChild(summary);
    container.appendChild(item);
  }
}
document.getElementById("more").onclick = function () {
  if (loading) {
    return;
  }
  loading = true;
  var req = new XMLHttpRequest();
  req.open("GET", "https://cdn.content.example/articles?page=" + (page + 1), true);
  req.onload = function () {
    page++;
    loading = false;
    appendArticles(JSON.parse(req.responseText).items);
  };
  req.send();
};
"""),
]

# stub a blocker injects in place of a blocked analytics script
SURROGATE_STUBS = [
    r"""(function () { var noop = function () {}; window._q = {push: noop}; window.ga = noop; })();""",
    r"""(function () { window.likeInit = function () {}; })();""",
]
