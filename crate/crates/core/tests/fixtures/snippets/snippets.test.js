const { render } = require('./render');

/**
  * @skipOnNodeVersion 20,22
  */
it('should return a valid Provider Component', () => {
  const provider = render('<Provider />');
  expect(provider).toBeDefined();
});

/**
  * @skipOnOS win32
  */
it('should output the correct snippet ids', () => {
  const ids = render('snippets/*.md').map((s) => s.id);
  expect(ids).toEqual(['a/b', 'c/d']);
});
