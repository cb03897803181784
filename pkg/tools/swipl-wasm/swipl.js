#!/usr/bin/env node
// Minimal `swipl`-compatible launcher around the WebAssembly build.
// Supports: swipl [-q] [--on-error=status] FILE   and   swipl --version
'use strict';
const fs = require('fs');
const path = require('path');
const SWIPL = require('swipl-wasm');

const ANSI = /\x1b\[[0-9;]*m/g;
const argv = process.argv.slice(2);
let sawError = false;

const out = s => fs.writeSync(1, s.replace(ANSI, '') + '\n');
const err = s => {
  const line = s.replace(ANSI, '');
  if (line.startsWith('ERROR:')) sawError = true;
  fs.writeSync(2, line + '\n');
};

function finish(status) {
  // mirrors --on-error=status: printed errors turn a clean halt into status 1
  process.exit(status === 0 && sawError ? 1 : status);
}

function run(args, preRun) {
  SWIPL({ arguments: args, preRun: preRun ? [preRun] : [], print: out, printErr: err })
    .then(() => finish(0), e => {
      if (e && typeof e.status === 'number') finish(e.status);
      else { err(String(e && e.stack || e)); process.exit(2); }
    });
}

if (argv.includes('--version')) {
  run(['-q', '-g',
    'current_prolog_flag(version_data,swi(A,B,C,_)),' +
    'format("SWI-Prolog version ~w.~w.~w for wasm (WebAssembly)~n",[A,B,C])',
    '-t', 'halt']);
} else {
  const files = argv.filter(a => !a.startsWith('-'));
  if (files.length !== 1) {
    err('usage: swipl [-q] FILE | swipl --version');
    process.exit(2);
  }
  const file = path.resolve(files[0]);
  const dir = path.dirname(file);
  // The wasm filesystem is in-memory: mirror the program's directory into it.
  run(['-q', '--no-tty', '--on-error=status', file], m => {
    m.FS.mkdirTree(dir);
    for (const name of fs.readdirSync(dir)) {
      const p = path.join(dir, name);
      if (fs.statSync(p).isFile()) m.FS.writeFile(p, fs.readFileSync(p));
    }
    m.FS.chdir(dir);
  });
}
