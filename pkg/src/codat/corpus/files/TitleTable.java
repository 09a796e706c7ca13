public class TitleTable {
    //OVERVIEW: Keeps track of documents with their titles.

    Map map; //maps each title (a string) to its matching Doc.
    //We assume that titles are unique (formalize as REQUIRES)

    //constructors

    public TitleTable() {
        //EFFECTS: Initializes this to be an empty table.
        map = new HashMap();
    }

    //methods

    public void addDoc(Doc d) throws DuplicateException {
        //REQUIRES: d is not null.
        //MODIFIES:  this.
        //EFFECTS: If a document with d's title is already in this throws DuplicateException,
        //   else adds d with its title to this.
        //HELPS: Engine.addDocs(u)

        if (map.containsKey(d)) throw new DuplicateException("TitleTable.addDoc");
        else map.put(d.getTitle(), d);
    }


    public Doc lookup(String t) throws NotPossibleException {
        //EFFECTS: If t is null or there is no document with
        //   title t in this throws NotPossibleException
        //   else returns the document with title t.
        //HELPS: Engine.findDoc(t)

        if (t==null || !map.containsKey(t)) throw new NotPossibleException("TitleTable.lookup");
        else return((Doc) map.get(t));
    }
}
